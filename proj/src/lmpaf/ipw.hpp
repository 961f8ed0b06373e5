#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmpaf/cox.hpp"
#include "lmpaf/types.hpp"

namespace lmpaf {

struct PersonTimeRow {
  std::int32_t subject = 0;  // index into PersonTimeTable::subjects
  int interval = 0;          // 0-based interval within the window
  double start = 0.0;        // absolute study times, start < stop
  double stop = 0.0;
  bool exposed_entering = false;  // exposure state at interval start
  bool acquires = false;          // exposure acquired within this interval
  double acquisition_time = 0.0;  // set when acquires
  int event_cause = 0;            // 0 none, 1 event of interest, 2 competing
  CovariateMap covariates;        // carried forward to the interval start
};

// Long-format expansion of a landmark dataset on a discrete grid. A
// subject's rows stop at the event, censoring, or the window end (subjects
// event-free at l+h are administratively censored there).
struct PersonTimeTable {
  double landmark = 0.0;
  double window = 0.0;
  double step = 1.0;
  int n_intervals = 0;
  std::vector<std::string> subjects;
  std::vector<bool> exposed_at_l;
  std::vector<PersonTimeRow> rows;  // ordered by (subject, interval)
  std::uint64_t grid_id = 0;
};

struct IpwOptions {
  std::optional<double> truncation_percentile = 0.99;
  double grid_step = 1.0;
  bool exposure_as_covariate = true;
  double covariate_lag = 0.0;  // look covariates up at (time - lag)
  std::vector<std::string> confounders;
};

PersonTimeTable expand_person_time(const LandmarkDataset& dataset,
                                   const ValidatedCohort& cohort, double step,
                                   double covariate_lag = 0.0);

struct SubjectWeights {
  std::vector<double> row_weight;  // aligned with PersonTimeTable::rows
  double truncation_low = 0.0;
  double truncation_high = 0.0;
  std::int64_t n_truncated = 0;
};

// Stabilized inverse-probability-of-exposure weights from pooled discrete
// -time logit models: denominator on confounders + interval terms, numerator
// on interval terms alone. Weights are cumulative up to acquisition and
// constant afterwards; optional symmetric percentile truncation.
SubjectWeights estimate_weights(const PersonTimeTable& table,
                                const std::vector<std::string>& confounders,
                                std::optional<double> truncation_percentile);

CoxFit fit_weighted_cox(const PersonTimeTable& table,
                        const SubjectWeights& weights, Cause cause,
                        const std::vector<std::string>& covariates,
                        bool exposure_as_covariate);

// Standardized counterfactual window risk: every subject's cause-1 CIF under
// exposure set to zero over the whole window, averaged over the at-risk
// population. S(t) is the product-limit over both cause-specific hazards so
// CIF1 + CIF2 + S add to one.
double counterfactual_window_risk(const CoxFit& fit_event,
                                  const CoxFit& fit_competing,
                                  const PersonTimeTable& table);

}  // namespace lmpaf
