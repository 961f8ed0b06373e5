#pragma once

#include <string>
#include <vector>

#include "lmpaf/types.hpp"

namespace lmpaf {

struct ValidationIssue {
  std::string subject_id;
  std::string code;  // errc name
  std::string detail;
};

// Checks every record against the cohort invariants and collects all
// violations before failing, so a bad file is diagnosed in one pass.
// `censoring_allowed` declares whether censored observations may occur before
// the study horizon; a record with event_type=0 at exactly the horizon is an
// administrative survivor and is always legal.
ValidatedCohort validate_cohort(std::vector<SubjectRecord> records,
                                CovariateSchema schema, double study_horizon,
                                bool censoring_allowed);

// Exposure state at time t; exposure is absorbing and acquiring it at t
// counts as exposed at t.
bool exposure_state_at(const SubjectRecord& record, double t);

// The landmark dataset at l with prediction window (l, l+h]. A subject with
// final_time exactly l is not at risk; an event exactly at l+h is inside the
// window; a censoring exactly at l+h means the window outcome was observed.
LandmarkDataset build_landmark_dataset(const ValidatedCohort& cohort, double l,
                                       double h);

// Candidate grid from `from` (default 0) in steps of `spacing` up to `to`
// (default horizon - h, keeping every window inside the horizon), filtered to
// landmarks with at least min_count exposed and min_count unexposed subjects
// at risk.
std::vector<double> choose_landmarks(const ValidatedCohort& cohort, double h,
                                     int min_count, double spacing = 1.0,
                                     double from = 0.0,
                                     std::optional<double> to = std::nullopt);

StackedLandmarkDataset stack_landmarks(
    const std::vector<LandmarkDataset>& datasets);

// Covariate values at time t (last panel value at or before t, baseline
// otherwise). Used for landmark rows and for person-time expansion.
CovariateMap covariates_at(const SubjectRecord& record, double t);

}  // namespace lmpaf
