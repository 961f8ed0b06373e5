#include "lmpaf/event_data.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lmpaf/errors.hpp"

namespace lmpaf {

std::size_t LandmarkDataset::n_exposed() const {
  std::size_t k = 0;
  for (const auto& r : rows) k += r.exposure_at_l ? 1 : 0;
  return k;
}

std::size_t LandmarkDataset::n_cases() const {
  std::size_t k = 0;
  for (const auto& r : rows) k += r.outcome == WindowOutcome::EventInWindow;
  return k;
}

namespace {

void check_record(const SubjectRecord& r, const CovariateSchema& schema,
                  double horizon, bool censoring_allowed,
                  std::vector<ValidationIssue>& issues) {
  auto add = [&](errc code, const std::string& detail) {
    issues.push_back({r.subject_id, errc_name(code), detail});
  };
  if (r.entry_time < 0.0 || r.final_time < 0.0 ||
      (r.exposure_time && *r.exposure_time < 0.0))
    add(errc::negative_time, "times must be nonnegative");
  if (r.entry_time > r.final_time)
    add(errc::negative_time, "entry_time exceeds final_time");
  if (r.exposure_time) {
    if (*r.exposure_time < r.entry_time)
      add(errc::negative_time, "exposure_time precedes entry_time");
    if (*r.exposure_time > r.final_time)
      add(errc::exposure_after_event, "exposure_time exceeds final_time");
  }
  if (r.event_type == EventType::Censored && !censoring_allowed &&
      r.final_time < horizon)
    add(errc::censoring_present,
        "censored record in a cohort declared free of censoring");
  double prev = r.entry_time;
  bool first = true;
  for (const auto& p : r.covariate_panel) {
    if ((first && p.time < r.entry_time) || (!first && p.time <= prev)) {
      add(errc::negative_time, "covariate panel times must be strictly "
                               "increasing within [entry_time, final_time]");
      break;
    }
    if (p.time > r.final_time) {
      add(errc::negative_time, "covariate panel time exceeds final_time");
      break;
    }
    prev = p.time;
    first = false;
  }
  for (const auto& [name, _] : r.baseline_covariates)
    if (!schema.contains(name))
      add(errc::unknown_covariate, "baseline covariate '" + name + "'");
  for (const auto& p : r.covariate_panel)
    for (const auto& [name, _] : p.values)
      if (!schema.contains(name))
        add(errc::unknown_covariate, "panel covariate '" + name + "'");
}

}  // namespace

ValidatedCohort validate_cohort(std::vector<SubjectRecord> records,
                                CovariateSchema schema, double study_horizon,
                                bool censoring_allowed) {
  if (records.empty()) fail(errc::invalid_argument, "cohort has no records");
  if (!(study_horizon > 0.0))
    fail(errc::invalid_argument, "study horizon must be positive");

  std::vector<ValidationIssue> issues;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.subject_id).second)
      issues.push_back({r.subject_id, errc_name(errc::duplicate_id),
                        "subject_id occurs more than once"});
    check_record(r, schema, study_horizon, censoring_allowed, issues);
  }
  if (!issues.empty()) {
    std::ostringstream msg;
    msg << issues.size() << " validation issue(s):";
    for (const auto& i : issues)
      msg << "\n  [" << i.code << "] subject '" << i.subject_id << "': "
          << i.detail;
    // the first issue's code labels the failure
    for (const auto& i : issues)
      if (i.code == errc_name(errc::duplicate_id))
        fail(errc::duplicate_id, msg.str());
    errc lead = errc::invalid_argument;
    const std::string& c = issues.front().code;
    if (c == errc_name(errc::negative_time)) lead = errc::negative_time;
    else if (c == errc_name(errc::exposure_after_event))
      lead = errc::exposure_after_event;
    else if (c == errc_name(errc::unknown_covariate))
      lead = errc::unknown_covariate;
    else if (c == errc_name(errc::censoring_present))
      lead = errc::censoring_present;
    fail(lead, msg.str());
  }

  ValidatedCohort cohort;
  cohort.records = std::move(records);
  cohort.study_horizon = study_horizon;
  cohort.covariate_schema = std::move(schema);
  cohort.has_censoring = false;
  for (const auto& r : cohort.records)
    if (r.event_type == EventType::Censored && r.final_time < study_horizon)
      cohort.has_censoring = true;
  return cohort;
}

bool exposure_state_at(const SubjectRecord& record, double t) {
  if (t < record.entry_time)
    fail(errc::time_before_entry,
         "subject '" + record.subject_id + "' entered after the query time");
  return record.exposure_time && *record.exposure_time <= t;
}

CovariateMap covariates_at(const SubjectRecord& record, double t) {
  CovariateMap out = record.baseline_covariates;
  for (const auto& p : record.covariate_panel) {
    if (p.time > t) break;
    for (const auto& [name, value] : p.values) out[name] = value;
  }
  return out;
}

LandmarkDataset build_landmark_dataset(const ValidatedCohort& cohort, double l,
                                       double h) {
  if (l < 0.0) fail(errc::invalid_argument, "landmark must be nonnegative");
  if (!(h > 0.0)) fail(errc::invalid_argument, "window must be positive");

  LandmarkDataset ds;
  ds.landmark = l;
  ds.window = h;
  ds.has_censoring = cohort.has_censoring;
  ds.study_horizon = cohort.study_horizon;
  const double window_end = l + h;

  for (const auto& r : cohort.records) {
    if (!(r.final_time > l) || r.entry_time > l) continue;  // not at risk at l

    LandmarkRow row;
    row.subject_id = r.subject_id;
    row.exposure_at_l = r.exposure_time && *r.exposure_time <= l;
    row.covariates_at_l = covariates_at(r, l);

    if (r.final_time > window_end) {
      row.outcome = WindowOutcome::NoEventInWindow;
      row.time_in_window = window_end;
    } else {
      row.time_in_window = r.final_time;
      switch (r.event_type) {
        case EventType::EventOfInterest:
          row.outcome = WindowOutcome::EventInWindow;
          row.cause = EventType::EventOfInterest;
          break;
        case EventType::CompetingEvent:
          row.outcome = WindowOutcome::NoEventInWindow;
          row.cause = EventType::CompetingEvent;
          break;
        case EventType::Censored:
          // censoring exactly at l+h means the window outcome was observed
          row.outcome = r.final_time == window_end
                            ? WindowOutcome::NoEventInWindow
                            : WindowOutcome::CensoredInWindow;
          break;
      }
    }
    if (!row.exposure_at_l && r.exposure_time && *r.exposure_time > l &&
        *r.exposure_time <= window_end)
      row.exposure_time_in_window = *r.exposure_time;
    ds.rows.push_back(std::move(row));
  }

  if (ds.rows.empty())
    fail(errc::empty_risk_set, "no subjects at risk at landmark " +
                                   std::to_string(l));
  std::stable_sort(ds.rows.begin(), ds.rows.end(),
                   [](const LandmarkRow& a, const LandmarkRow& b) {
                     return a.subject_id < b.subject_id;
                   });
  return ds;
}

std::vector<double> choose_landmarks(const ValidatedCohort& cohort, double h,
                                     int min_count, double spacing, double from,
                                     std::optional<double> to) {
  if (min_count < 1) fail(errc::invalid_argument, "min_count must be >= 1");
  if (!(spacing > 0.0)) fail(errc::invalid_argument, "spacing must be > 0");
  if (!(h > 0.0)) fail(errc::invalid_argument, "window must be positive");
  if (from < 0.0) fail(errc::invalid_argument, "grid start must be >= 0");

  std::vector<double> out;
  const double last = std::min(to.value_or(cohort.study_horizon - h),
                               cohort.study_horizon - h);
  for (double l = from; l <= last + 1e-12; l += spacing) {
    std::size_t exposed = 0, unexposed = 0;
    for (const auto& r : cohort.records) {
      if (!(r.final_time > l) || r.entry_time > l) continue;
      if (r.exposure_time && *r.exposure_time <= l)
        ++exposed;
      else
        ++unexposed;
    }
    if (exposed >= static_cast<std::size_t>(min_count) &&
        unexposed >= static_cast<std::size_t>(min_count))
      out.push_back(l);
  }
  return out;
}

StackedLandmarkDataset stack_landmarks(
    const std::vector<LandmarkDataset>& datasets) {
  if (datasets.empty())
    fail(errc::invalid_argument, "no landmark datasets to stack");
  StackedLandmarkDataset stacked;
  stacked.window = datasets.front().window;
  stacked.has_censoring = false;
  stacked.study_horizon = datasets.front().study_horizon;
  for (const auto& ds : datasets) {
    if (ds.window != stacked.window)
      fail(errc::mixed_windows,
           "landmark datasets use different prediction windows");
    stacked.has_censoring = stacked.has_censoring || ds.has_censoring;
  }
  std::vector<const LandmarkDataset*> order;
  for (const auto& ds : datasets) order.push_back(&ds);
  std::stable_sort(order.begin(), order.end(),
                   [](const LandmarkDataset* a, const LandmarkDataset* b) {
                     return a->landmark < b->landmark;
                   });
  for (const auto* ds : order) {
    stacked.landmarks.push_back(ds->landmark);
    for (const auto& row : ds->rows)
      stacked.rows.push_back({ds->landmark, row});
  }
  return stacked;
}

}  // namespace lmpaf
