#include "lmpaf/survival.hpp"

#include <algorithm>
#include <cmath>

#include "lmpaf/errors.hpp"

namespace lmpaf {

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return initial_value;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

namespace {

enum class StopKind { Cause1, Cause2, Censor };

struct Observation {
  double stop = 0.0;
  StopKind kind = StopKind::Censor;
};

// (stop, kind) of a landmark row on the chosen clock. For the counterfactual
// clock, acquiring the exposure censors the subject at the acquisition time;
// an event tied with the acquisition stays an event.
Observation observe(const LandmarkRow& row, double window_end, Cause cause,
                    bool counterfactual_clock) {
  Observation obs;
  if (row.outcome == WindowOutcome::EventInWindow) {
    obs = {row.time_in_window, cause == Cause::EventOfInterest
                                   ? StopKind::Cause1
                                   : StopKind::Cause2};
  } else if (row.cause == EventType::CompetingEvent) {
    obs = {row.time_in_window, cause == Cause::CompetingEvent
                                   ? StopKind::Cause1
                                   : StopKind::Cause2};
  } else if (row.outcome == WindowOutcome::CensoredInWindow) {
    obs = {row.time_in_window, StopKind::Censor};
  } else {
    obs = {window_end, StopKind::Censor};  // event-free through the window
  }
  if (counterfactual_clock && row.exposure_time_in_window &&
      *row.exposure_time_in_window < obs.stop)
    obs = {*row.exposure_time_in_window, StopKind::Censor};
  return obs;
}

struct AggregatedTimes {
  std::vector<double> time;
  std::vector<double> d1;  // target-cause events
  std::vector<double> d2;  // other-cause events
  std::vector<double> c;   // censorings
  std::vector<double> at_risk;
  std::vector<std::size_t> stop_index;  // per observation, index into time
};

AggregatedTimes aggregate(const std::vector<Observation>& obs) {
  AggregatedTimes agg;
  std::vector<std::size_t> order(obs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return obs[a].stop < obs[b].stop;
  });
  agg.stop_index.resize(obs.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    std::size_t i = order[r];
    if (agg.time.empty() || obs[i].stop > agg.time.back()) {
      agg.time.push_back(obs[i].stop);
      agg.d1.push_back(0.0);
      agg.d2.push_back(0.0);
      agg.c.push_back(0.0);
    }
    std::size_t j = agg.time.size() - 1;
    agg.stop_index[i] = j;
    switch (obs[i].kind) {
      case StopKind::Cause1: agg.d1[j] += 1.0; break;
      case StopKind::Cause2: agg.d2[j] += 1.0; break;
      case StopKind::Censor: agg.c[j] += 1.0; break;
    }
  }
  agg.at_risk.resize(agg.time.size());
  double y = static_cast<double>(obs.size());
  for (std::size_t j = 0; j < agg.time.size(); ++j) {
    agg.at_risk[j] = y;
    y -= agg.d1[j] + agg.d2[j] + agg.c[j];
  }
  return agg;
}

// Full-sample Aalen-Johansen CIF of the target cause, with the jump curve.
double aj_estimate(const AggregatedTimes& agg, StepFunction* curve) {
  double surv = 1.0;
  double cif = 0.0;
  for (std::size_t j = 0; j < agg.time.size(); ++j) {
    double y = agg.at_risk[j];
    if (!(y > 0.0)) break;
    double inc = surv * agg.d1[j] / y;
    if (agg.d1[j] > 0.0) {
      cif += inc;
      if (curve) {
        curve->times.push_back(agg.time[j]);
        curve->values.push_back(cif);
      }
    }
    surv *= 1.0 - (agg.d1[j] + agg.d2[j]) / y;
  }
  return cif;
}

std::vector<Observation> route_observations(const LandmarkDataset& dataset,
                                            Cause cause,
                                            bool counterfactual_clock,
                                            std::vector<std::size_t>* rows) {
  const double window_end = dataset.landmark + dataset.window;
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    const auto& row = dataset.rows[i];
    if (counterfactual_clock && row.exposure_at_l) continue;
    obs.push_back(observe(row, window_end, cause, counterfactual_clock));
    if (rows) rows->push_back(i);
  }
  return obs;
}

PseudoValueSet jackknife(const LandmarkDataset& dataset, Cause cause,
                         bool counterfactual_clock) {
  if (dataset.landmark + dataset.window > dataset.study_horizon + 1e-12)
    fail(errc::invalid_argument,
         "pseudo-observations require l + h <= study horizon");

  std::vector<std::size_t> row_of;
  std::vector<Observation> obs =
      route_observations(dataset, cause, counterfactual_clock, &row_of);
  if (obs.empty()) fail(errc::empty_risk_set, "no subjects in the risk set");
  if (obs.size() < 2)
    fail(errc::single_subject, "pseudo-observations need at least 2 subjects");

  AggregatedTimes agg = aggregate(obs);
  const std::size_t m = agg.time.size();
  const double n = static_cast<double>(obs.size());
  const double full = aj_estimate(agg, nullptr);

  // Exact leave-one-out via prefix/suffix recursions: removing a subject
  // lowers the risk set by one up to its stop time and adjusts the counts at
  // the stop time itself; afterwards the product-limit factors are unchanged.
  //
  //   prefix_surv[j] = prod_{k<=j} (1 - D_k / (Y_k - 1))        (D = d1+d2)
  //   prefix_cif[j]  = sum_{k<=j} prefix_surv[k-1] d1_k/(Y_k-1)
  //   tail_cif[j]    = CIF mass from j onward per unit of survival, with the
  //                    original risk sets.
  std::vector<double> prefix_surv(m + 1), prefix_cif(m + 1), tail_cif(m + 2);
  prefix_surv[0] = 1.0;
  prefix_cif[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    double y1 = agg.at_risk[j - 1] - 1.0;
    if (y1 <= 0.0) {  // removed subject was the last one at risk here
      prefix_surv[j] = 0.0;
      prefix_cif[j] = prefix_cif[j - 1];
      continue;
    }
    prefix_cif[j] = prefix_cif[j - 1] + prefix_surv[j - 1] * agg.d1[j - 1] / y1;
    prefix_surv[j] =
        prefix_surv[j - 1] * (1.0 - (agg.d1[j - 1] + agg.d2[j - 1]) / y1);
  }
  tail_cif[m + 1] = 0.0;
  for (std::size_t j = m; j >= 1; --j) {
    double y = agg.at_risk[j - 1];
    tail_cif[j] = agg.d1[j - 1] / y +
                  (1.0 - (agg.d1[j - 1] + agg.d2[j - 1]) / y) * tail_cif[j + 1];
    if (j == 1) break;
  }

  PseudoValueSet out;
  out.landmark = dataset.landmark;
  out.window = dataset.window;
  out.n_used = static_cast<std::int64_t>(obs.size());
  out.subject_ids.reserve(obs.size());
  out.values.reserve(obs.size());

  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::size_t b = agg.stop_index[i];  // 0-based index of the stop time
    double loo;
    if (agg.at_risk[b] <= 1.0) {
      loo = prefix_cif[b];
    } else {
      double y1 = agg.at_risk[b] - 1.0;
      double d1 = agg.d1[b] - (obs[i].kind == StopKind::Cause1 ? 1.0 : 0.0);
      double d_all = agg.d1[b] + agg.d2[b] -
                     (obs[i].kind != StopKind::Censor ? 1.0 : 0.0);
      double surv_b = prefix_surv[b] * (1.0 - d_all / y1);
      loo = prefix_cif[b] + prefix_surv[b] * d1 / y1 + surv_b * tail_cif[b + 2];
    }
    out.subject_ids.push_back(dataset.rows[row_of[i]].subject_id);
    out.values.push_back(n * full - (n - 1.0) * loo);
  }

  out.full_sample_estimate = full;
  double mean = 0.0;
  for (double v : out.values) mean += v;
  mean /= n;
  if (std::abs(mean - full) > 1e-8)
    fail(errc::invalid_argument,
         "internal error: jackknife identity violated");
  return out;
}

}  // namespace

ConditionalCIF conditional_cif(const LandmarkDataset& dataset, Cause cause) {
  std::vector<Observation> obs =
      route_observations(dataset, cause, false, nullptr);
  if (obs.empty()) fail(errc::empty_risk_set, "no subjects in the risk set");
  AggregatedTimes agg = aggregate(obs);
  ConditionalCIF cif;
  cif.landmark = dataset.landmark;
  cif.window = dataset.window;
  cif.curve.initial_value = 0.0;
  cif.at_window_end = aj_estimate(agg, &cif.curve);
  return cif;
}

PseudoValueSet pseudo_observations(const LandmarkDataset& dataset,
                                   Cause cause) {
  return jackknife(dataset, cause, false);
}

PseudoValueSet pseudo_observations_counterfactual(
    const LandmarkDataset& dataset) {
  return jackknife(dataset, Cause::EventOfInterest, true);
}

}  // namespace lmpaf
