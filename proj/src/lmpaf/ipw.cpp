#include "lmpaf/ipw.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_map>

#include "lmpaf/errors.hpp"
#include "lmpaf/event_data.hpp"
#include "lmpaf/glm.hpp"
#include "lmpaf/stats.hpp"

namespace lmpaf {

namespace {

std::uint64_t next_grid_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

}  // namespace

PersonTimeTable expand_person_time(const LandmarkDataset& dataset,
                                   const ValidatedCohort& cohort, double step,
                                   double covariate_lag) {
  if (!(step > 0.0)) fail(errc::invalid_argument, "grid step must be > 0");
  double ratio = dataset.window / step;
  int n_intervals = static_cast<int>(std::llround(ratio));
  if (std::abs(ratio - n_intervals) > 1e-9 || n_intervals < 1)
    fail(errc::invalid_argument, "grid step must divide the window");

  std::unordered_map<std::string, const SubjectRecord*> by_id;
  for (const auto& r : cohort.records) by_id[r.subject_id] = &r;

  PersonTimeTable table;
  table.landmark = dataset.landmark;
  table.window = dataset.window;
  table.step = step;
  table.n_intervals = n_intervals;
  table.grid_id = next_grid_id();

  const double l = dataset.landmark;
  for (std::size_t s = 0; s < dataset.rows.size(); ++s) {
    const LandmarkRow& row = dataset.rows[s];
    auto it = by_id.find(row.subject_id);
    if (it == by_id.end())
      fail(errc::invalid_argument,
           "subject '" + row.subject_id + "' missing from the cohort");
    const SubjectRecord& rec = *it->second;
    table.subjects.push_back(row.subject_id);
    table.exposed_at_l.push_back(row.exposure_at_l);

    const double stop_time = row.time_in_window;  // capped at l+h upstream
    for (int k = 0; k < n_intervals; ++k) {
      double start = l + k * step;
      double stop = std::min(l + (k + 1) * step, stop_time);
      if (!(start < stop_time)) break;

      PersonTimeRow pt;
      pt.subject = static_cast<std::int32_t>(s);
      pt.interval = k;
      pt.start = start;
      pt.stop = stop;
      pt.exposed_entering =
          row.exposure_at_l ||
          (row.exposure_time_in_window && *row.exposure_time_in_window <= start);
      pt.acquires = row.exposure_time_in_window &&
                    *row.exposure_time_in_window > start &&
                    *row.exposure_time_in_window <= stop;
      if (pt.acquires) pt.acquisition_time = *row.exposure_time_in_window;
      if (row.cause && stop == stop_time)
        pt.event_cause = static_cast<int>(*row.cause);
      pt.covariates =
          covariates_at(rec, std::max(start - covariate_lag, rec.entry_time));
      table.rows.push_back(std::move(pt));
    }
  }
  return table;
}

namespace {

// Pooled discrete-time logit hazard of acquisition on the unexposed rows.
// Interval enters with linear and quadratic terms, reduced when the grid has
// too few distinct intervals to support them.
GlmFit fit_acquisition_model(const PersonTimeTable& table,
                             const std::vector<std::string>& confounders,
                             const std::vector<std::size_t>& unexposed_rows) {
  std::vector<int> distinct;
  for (auto r : unexposed_rows) {
    int k = table.rows[r].interval;
    if (std::find(distinct.begin(), distinct.end(), k) == distinct.end())
      distinct.push_back(k);
  }
  int interval_degree = std::min<int>(2, static_cast<int>(distinct.size()) - 1);

  DesignMatrix d;
  d.names.push_back("(Intercept)");
  if (interval_degree >= 1) d.names.push_back("interval");
  if (interval_degree >= 2) d.names.push_back("interval2");
  for (const auto& c : confounders) d.names.push_back(c);

  const auto n = static_cast<Eigen::Index>(unexposed_rows.size());
  d.X.resize(n, static_cast<Eigen::Index>(d.names.size()));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PersonTimeRow& row = table.rows[unexposed_rows[static_cast<std::size_t>(i)]];
    Eigen::Index j = 0;
    d.X(i, j++) = 1.0;
    if (interval_degree >= 1) d.X(i, j++) = row.interval;
    if (interval_degree >= 2) d.X(i, j++) = row.interval * row.interval;
    for (const auto& c : confounders) {
      auto it = row.covariates.find(c);
      if (it == row.covariates.end())
        fail(errc::missing_predictor, "confounder '" + c + "' missing for '" +
                                          table.subjects[static_cast<std::size_t>(
                                              row.subject)] +
                                          "'");
      d.X(i, j++) = it->second;
    }
    y[i] = row.acquires ? 1.0 : 0.0;
  }
  return fit_binomial(d, y, nullptr, Link::Logit);
}

double acquisition_prob(const GlmFit& fit, const PersonTimeRow& row) {
  CovariateMap x = row.covariates;
  x["interval"] = row.interval;
  x["interval2"] = static_cast<double>(row.interval) * row.interval;
  return predict_prob(fit, x).probability;
}

}  // namespace

SubjectWeights estimate_weights(const PersonTimeTable& table,
                                const std::vector<std::string>& confounders,
                                std::optional<double> truncation_percentile) {
  SubjectWeights w;
  w.row_weight.assign(table.rows.size(), 1.0);

  std::vector<std::size_t> unexposed_rows;
  bool any_acquisition = false;
  bool any_unexposed_subject = false;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!table.rows[r].exposed_entering) {
      unexposed_rows.push_back(r);
      any_acquisition = any_acquisition || table.rows[r].acquires;
    }
  }
  for (bool e : table.exposed_at_l) any_unexposed_subject |= !e;
  if (!any_unexposed_subject)
    fail(errc::all_exposed_at_baseline,
         "all subjects are exposed at the landmark");
  if (!any_acquisition) return w;  // no exposure process inside the window

  GlmFit denominator = fit_acquisition_model(table, confounders, unexposed_rows);
  GlmFit numerator = fit_acquisition_model(table, {}, unexposed_rows);

  // cumulative stabilized weight per subject, constant after acquisition
  double cumulative = 1.0;
  std::int32_t current = -1;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const PersonTimeRow& row = table.rows[r];
    if (row.subject != current) {
      current = row.subject;
      cumulative = 1.0;
    }
    if (!row.exposed_entering) {
      double p_den = acquisition_prob(denominator, row);
      double p_num = acquisition_prob(numerator, row);
      double factor = row.acquires ? p_num / p_den
                                   : (1.0 - p_num) / (1.0 - p_den);
      if (!std::isfinite(factor) || factor <= 0.0)
        fail(errc::degenerate_inputs, "non-positive stabilized weight factor");
      cumulative *= factor;
    }
    w.row_weight[r] = cumulative;
  }

  if (truncation_percentile) {
    double p = *truncation_percentile;
    if (!(p > 0.5) || !(p < 1.0))
      fail(errc::invalid_argument,
           "truncation percentile must be in (0.5, 1)");
    w.truncation_low = quantile_type7(w.row_weight, 1.0 - p);
    w.truncation_high = quantile_type7(w.row_weight, p);
    for (auto& v : w.row_weight) {
      if (v < w.truncation_low) { v = w.truncation_low; ++w.n_truncated; }
      else if (v > w.truncation_high) { v = w.truncation_high; ++w.n_truncated; }
    }
  }
  return w;
}

CoxFit fit_weighted_cox(const PersonTimeTable& table,
                        const SubjectWeights& weights, Cause cause,
                        const std::vector<std::string>& covariates,
                        bool exposure_as_covariate) {
  if (weights.row_weight.size() != table.rows.size())
    fail(errc::invalid_argument, "weights do not align with the table");

  bool exposure_varies = false;
  for (const auto& row : table.rows)
    if (row.exposed_entering) exposure_varies = true;
  bool with_exposure = exposure_as_covariate && exposure_varies;

  CoxData data;
  data.grid_id = table.grid_id;
  if (with_exposure) data.names.push_back("exposure");
  for (const auto& c : covariates) data.names.push_back(c);

  std::vector<Eigen::RowVectorXd> xs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const PersonTimeRow& row = table.rows[r];
    double start = row.start;
    double stop = row.stop;
    bool event = row.event_cause == static_cast<int>(cause);
    if (!exposure_as_covariate) {
      // exposure-censored route: unexposed person-time only, censored at
      // acquisition; an event tied with the acquisition stays an event
      if (row.exposed_entering) continue;
      if (row.acquires && row.acquisition_time < row.stop) {
        stop = row.acquisition_time;
        event = false;
      }
    }
    CoxRow cr;
    cr.subject = row.subject;
    cr.start = start;
    cr.stop = stop;
    cr.event = event;
    cr.weight = weights.row_weight[r];
    Eigen::RowVectorXd x(static_cast<Eigen::Index>(data.names.size()));
    Eigen::Index j = 0;
    if (with_exposure) x(j++) = row.exposed_entering ? 1.0 : 0.0;
    for (const auto& c : covariates) {
      auto it = row.covariates.find(c);
      if (it == row.covariates.end())
        fail(errc::missing_predictor, "covariate '" + c + "' missing");
      x(j++) = it->second;
    }
    data.rows.push_back(cr);
    xs.push_back(std::move(x));
  }
  data.X.resize(static_cast<Eigen::Index>(xs.size()),
                static_cast<Eigen::Index>(data.names.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    data.X.row(static_cast<Eigen::Index>(i)) = xs[i];

  bool any_event = false;
  for (const auto& r : data.rows) any_event |= r.event;
  if (!any_event)
    fail(errc::invalid_argument, "no event of the requested cause in window");
  return fit_cox(data);
}

double counterfactual_window_risk(const CoxFit& fit_event,
                                  const CoxFit& fit_competing,
                                  const PersonTimeTable& table) {
  if (fit_event.grid_id != table.grid_id ||
      fit_competing.grid_id != table.grid_id)
    fail(errc::grid_mismatch,
         "Cox fits were not estimated on this person-time table");

  // merged jump grid of the two baseline hazards
  std::vector<double> grid;
  std::merge(fit_event.baseline_cumhaz.times.begin(),
             fit_event.baseline_cumhaz.times.end(),
             fit_competing.baseline_cumhaz.times.begin(),
             fit_competing.baseline_cumhaz.times.end(),
             std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto jumps = [&](const CoxFit& fit) {
    std::vector<double> dl(grid.size(), 0.0);
    double prev = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double value = fit.baseline_cumhaz(grid[g]);
      dl[g] = value - prev;
      prev = value;
    }
    return dl;
  };
  std::vector<double> dl1 = jumps(fit_event);
  std::vector<double> dl2 = jumps(fit_competing);

  auto risk_multiplier = [&](const CoxFit& fit, const PersonTimeRow& row) {
    double eta = 0.0;
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
      if (fit.names[j] == "exposure") continue;  // intervention: exposure 0
      auto it = row.covariates.find(fit.names[j]);
      if (it == row.covariates.end())
        fail(errc::missing_predictor, "covariate '" + fit.names[j] + "' missing");
      eta += it->second * fit.coefficients[static_cast<Eigen::Index>(j)];
    }
    return std::exp(eta);
  };

  double total = 0.0;
  std::size_t n_subjects = table.subjects.size();
  std::size_t row_index = 0;
  for (std::size_t s = 0; s < n_subjects; ++s) {
    // the subject's covariate path over the whole window: rows while present,
    // last observed row carried forward after their factual follow-up ends
    std::vector<const PersonTimeRow*> path;
    while (row_index < table.rows.size() &&
           table.rows[row_index].subject == static_cast<std::int32_t>(s))
      path.push_back(&table.rows[row_index++]);
    if (path.empty())
      fail(errc::invalid_argument, "subject without person-time rows");

    double surv = 1.0, cif1 = 0.0;
    std::size_t p = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (p + 1 < path.size() && grid[g] > path[p]->stop) ++p;
      double m1 = risk_multiplier(fit_event, *path[p]);
      double m2 = risk_multiplier(fit_competing, *path[p]);
      double h1 = dl1[g] * m1;
      double h2 = dl2[g] * m2;
      cif1 += surv * h1;
      surv *= std::max(1.0 - h1 - h2, 0.0);
    }
    total += cif1;
  }
  return total / static_cast<double>(n_subjects);
}

}  // namespace lmpaf
