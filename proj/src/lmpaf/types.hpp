#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lmpaf {

enum class EventType : int {
  Censored = 0,
  EventOfInterest = 1,
  CompetingEvent = 2,
};

enum class Cause : int {
  EventOfInterest = 1,
  CompetingEvent = 2,
};

// Covariates keep a deterministic (sorted) key order so that every derived
// artifact is byte-stable under re-runs.
using CovariateMap = std::map<std::string, double>;

struct PanelEntry {
  double time = 0.0;
  CovariateMap values;
};

struct SubjectRecord {
  std::string subject_id;
  double entry_time = 0.0;
  std::optional<double> exposure_time;  // absent = never exposed
  double final_time = 0.0;              // min(event time, censoring time)
  EventType event_type = EventType::Censored;
  CovariateMap baseline_covariates;
  std::vector<PanelEntry> covariate_panel;  // strictly increasing times
};

struct CovariateSchema {
  std::vector<std::string> names;

  bool contains(const std::string& name) const {
    for (const auto& n : names)
      if (n == name) return true;
    return false;
  }
};

struct ValidatedCohort {
  std::vector<SubjectRecord> records;
  bool has_censoring = false;  // censoring before the study horizon occurs
  double study_horizon = 0.0;
  CovariateSchema covariate_schema;
};

enum class WindowOutcome : int {
  EventInWindow = 1,
  NoEventInWindow = 0,
  CensoredInWindow = -1,
};

struct LandmarkRow {
  std::string subject_id;
  bool exposure_at_l = false;
  CovariateMap covariates_at_l;
  WindowOutcome outcome = WindowOutcome::NoEventInWindow;
  // End of follow-up inside the window on the study clock, capped at l+h.
  double time_in_window = 0.0;
  // Cause of the absorbing event when one occurred at time_in_window <= l+h.
  std::optional<EventType> cause;
  // Acquisition time for rows unexposed at l that acquire inside (l, l+h].
  std::optional<double> exposure_time_in_window;
};

struct LandmarkDataset {
  double landmark = 0.0;
  double window = 0.0;
  bool has_censoring = false;
  double study_horizon = 0.0;
  std::vector<LandmarkRow> rows;

  std::size_t n_at_risk() const { return rows.size(); }
  std::size_t n_exposed() const;
  std::size_t n_cases() const;
};

struct StackedLandmarkDataset {
  double window = 0.0;
  std::vector<double> landmarks;

  struct Row {
    double landmark = 0.0;
    LandmarkRow row;
  };
  std::vector<Row> rows;
  bool has_censoring = false;
  double study_horizon = 0.0;
};

}  // namespace lmpaf
