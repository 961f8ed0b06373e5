#include "lmpaf/paf.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lmpaf/errors.hpp"
#include "lmpaf/event_data.hpp"
#include "lmpaf/format.hpp"
#include "lmpaf/parallel.hpp"
#include "lmpaf/rng.hpp"
#include "lmpaf/stats.hpp"
#include "lmpaf/survival.hpp"

namespace lmpaf {

const char* method_name(Method m) noexcept {
  switch (m) {
    case Method::LM_Miettinen: return "LM_Miettinen";
    case Method::LM_Marginal: return "LM_Marginal";
    case Method::PAF0_Pseudo: return "PAF0_Pseudo";
    case Method::PAF0_IPW: return "PAF0_IPW";
    case Method::Supermodel: return "Supermodel";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  for (Method m : {Method::LM_Miettinen, Method::LM_Marginal,
                   Method::PAF0_Pseudo, Method::PAF0_IPW, Method::Supermodel})
    if (name == method_name(m)) return m;
  return std::nullopt;
}

namespace {

constexpr double kZ975 = 1.959963984540054;

bool any_censored(const LandmarkDataset& ds) {
  for (const auto& r : ds.rows)
    if (r.outcome == WindowOutcome::CensoredInWindow) return true;
  return false;
}

bool use_pseudo(CensoringRoute route, const LandmarkDataset& ds) {
  switch (route) {
    case CensoringRoute::Complete: return false;
    case CensoringRoute::PseudoValues: return true;
    case CensoringRoute::Auto: return any_censored(ds);
  }
  return false;
}

std::vector<double> outcome_indicators(const LandmarkDataset& ds) {
  std::vector<double> y;
  y.reserve(ds.rows.size());
  for (const auto& r : ds.rows)
    y.push_back(r.outcome == WindowOutcome::EventInWindow ? 1.0 : 0.0);
  return y;
}

// Intercept-only maximum-likelihood window risk (Eq.-13 style); identical to
// the response mean wherever the estimating equation has an interior root.
double intercept_only_risk(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean <= 1e-6 || mean >= 1.0 - 1e-6) return mean;
  DesignMatrix d;
  d.names = {"(Intercept)"};
  d.X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = values[i];
  GlmFit fit = fit_binomial(d, y, nullptr, Link::Logit);
  return predict_prob(fit, {}).probability;
}

LandmarkDataset unexposed_stratum(const LandmarkDataset& ds) {
  LandmarkDataset sub = ds;
  sub.rows.clear();
  for (const auto& r : ds.rows)
    if (!r.exposure_at_l) sub.rows.push_back(r);
  if (sub.rows.empty())
    fail(errc::empty_risk_set, "no unexposed subjects at the landmark");
  return sub;
}

}  // namespace

PafComponents paf_lm(const LandmarkDataset& dataset,
                     const std::vector<std::string>& adjustment,
                     CensoringRoute route) {
  PafComponents out;
  if (use_pseudo(route, dataset)) {
    PseudoValueSet ps = pseudo_observations(dataset, Cause::EventOfInterest);
    RiskRatioEstimate rr =
        risk_ratio_at_landmark(dataset, adjustment, &ps.values);
    PrevalenceFit prev = prevalence_among_cases_model(dataset, ps.values);
    out.prevalence = prev.value;
    out.rr = rr.rr;
    out.se_log_rr = rr.se_log_rr;
    out.se_prev_logit = prev.value < 1.0
                            ? prev.se_log / (1.0 - prev.value)
                            : std::numeric_limits<double>::quiet_NaN();
  } else {
    RiskRatioEstimate rr = risk_ratio_at_landmark(dataset, adjustment);
    out.prevalence = prevalence_among_cases(dataset);
    out.rr = rr.rr;
    out.se_log_rr = rr.se_log_rr;
    double nc = static_cast<double>(dataset.n_cases());
    double p = out.prevalence;
    out.se_prev_logit = (p > 0.0 && p < 1.0)
                            ? std::sqrt(1.0 / (nc * p * (1.0 - p)))
                            : std::numeric_limits<double>::quiet_NaN();
  }
  out.estimate = out.prevalence * (out.rr - 1.0) / out.rr;
  return out;
}

namespace {

// Two-cause product-limit CIF from cause-specific Cox fits with fixed
// covariates; absent fits contribute zero hazard for their cause.
double cox_cif1(const CoxFit* fit1, const CoxFit* fit2,
                const CovariateMap& covariates) {
  std::vector<double> grid;
  if (fit1)
    grid.insert(grid.end(), fit1->baseline_cumhaz.times.begin(),
                fit1->baseline_cumhaz.times.end());
  if (fit2)
    grid.insert(grid.end(), fit2->baseline_cumhaz.times.begin(),
                fit2->baseline_cumhaz.times.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto multiplier = [&](const CoxFit& fit) {
    double eta = 0.0;
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
      auto it = covariates.find(fit.names[j]);
      if (it == covariates.end())
        fail(errc::missing_predictor,
             "covariate '" + fit.names[j] + "' missing for standardization");
      eta += it->second * fit.coefficients[static_cast<Eigen::Index>(j)];
    }
    return std::exp(eta);
  };
  double m1 = fit1 ? multiplier(*fit1) : 0.0;
  double m2 = fit2 ? multiplier(*fit2) : 0.0;

  double prev1 = 0.0, prev2 = 0.0, surv = 1.0, cif1 = 0.0;
  for (double t : grid) {
    double c1 = fit1 ? fit1->baseline_cumhaz(t) : 0.0;
    double c2 = fit2 ? fit2->baseline_cumhaz(t) : 0.0;
    double h1 = (c1 - prev1) * m1;
    double h2 = (c2 - prev2) * m2;
    prev1 = c1;
    prev2 = c2;
    cif1 += surv * h1;
    surv *= std::max(1.0 - h1 - h2, 0.0);
  }
  return cif1;
}

std::optional<CoxFit> stratum_cox(const LandmarkDataset& stratum,
                                  const std::vector<std::string>& adjustment,
                                  Cause cause) {
  bool any_event = false;
  for (const auto& r : stratum.rows)
    any_event |= r.cause && *r.cause == static_cast<EventType>(cause);
  if (!any_event) return std::nullopt;

  CoxData data;
  data.names = adjustment;
  data.rows.reserve(stratum.rows.size());
  data.X.resize(static_cast<Eigen::Index>(stratum.rows.size()),
                static_cast<Eigen::Index>(adjustment.size()));
  for (std::size_t i = 0; i < stratum.rows.size(); ++i) {
    const auto& r = stratum.rows[i];
    CoxRow row;
    row.subject = static_cast<std::int32_t>(i);
    row.start = stratum.landmark;
    row.stop = r.time_in_window;
    row.event = r.cause && *r.cause == static_cast<EventType>(cause);
    data.rows.push_back(row);
    for (std::size_t j = 0; j < adjustment.size(); ++j) {
      auto it = r.covariates_at_l.find(adjustment[j]);
      if (it == r.covariates_at_l.end())
        fail(errc::missing_predictor,
             "covariate '" + adjustment[j] + "' missing at the landmark");
      data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          it->second;
    }
  }
  return fit_cox(data);
}

}  // namespace

double paf_lm_marginal(const LandmarkDataset& dataset,
                       const std::vector<std::string>& adjustment) {
  double marginal =
      conditional_cif(dataset, Cause::EventOfInterest).at_window_end;
  if (!(marginal > 0.0))
    fail(errc::zero_marginal_risk, "marginal window risk is zero");

  LandmarkDataset unexposed = unexposed_stratum(dataset);
  double conditional;
  if (adjustment.empty()) {
    conditional =
        conditional_cif(unexposed, Cause::EventOfInterest).at_window_end;
  } else {
    auto fit1 = stratum_cox(unexposed, adjustment, Cause::EventOfInterest);
    auto fit2 = stratum_cox(unexposed, adjustment, Cause::CompetingEvent);
    double total = 0.0;
    for (const auto& r : dataset.rows)
      total += cox_cif1(fit1 ? &*fit1 : nullptr, fit2 ? &*fit2 : nullptr,
                        r.covariates_at_l);
    conditional = total / static_cast<double>(dataset.rows.size());
  }
  return (marginal - conditional) / marginal;
}

double paf0_lm(const LandmarkDataset& dataset, Paf0Backend backend,
               const ValidatedCohort& cohort, const IpwOptions& ipw,
               CensoringRoute route) {
  std::vector<double> outcomes;
  if (use_pseudo(route, dataset)) {
    outcomes = pseudo_observations(dataset, Cause::EventOfInterest).values;
  } else {
    if (any_censored(dataset))
      fail(errc::censoring_present,
           "censored rows present; use the pseudo-value route");
    outcomes = outcome_indicators(dataset);
  }
  double marginal = intercept_only_risk(outcomes);
  if (!(marginal > 0.0))
    fail(errc::zero_marginal_risk, "marginal window risk is zero");

  double counterfactual;
  if (backend == Paf0Backend::Pseudo) {
    counterfactual =
        pseudo_observations_counterfactual(dataset).full_sample_estimate;
  } else {
    PersonTimeTable table =
        expand_person_time(dataset, cohort, ipw.grid_step, ipw.covariate_lag);
    SubjectWeights weights =
        estimate_weights(table, ipw.confounders, ipw.truncation_percentile);
    // marginal structural outcome models: exposure only, confounding is
    // handled by the weights
    CoxFit fit1 = fit_weighted_cox(table, weights, Cause::EventOfInterest, {},
                                   ipw.exposure_as_covariate);
    CoxFit fit2 = fit_weighted_cox(table, weights, Cause::CompetingEvent, {},
                                   ipw.exposure_as_covariate);
    counterfactual = counterfactual_window_risk(fit1, fit2, table);
  }
  return (marginal - counterfactual) / marginal;
}

namespace {

struct BasisSpec {
  SupermodelSpec::Basis kind;
  int degree;
  std::vector<double> landmarks;  // distinct, for the indicator basis

  std::vector<std::string> names(const std::string& prefix) const {
    std::vector<std::string> out;
    if (kind == SupermodelSpec::Basis::Polynomial) {
      for (int j = 1; j <= degree; ++j)
        out.push_back(prefix + (j == 1 ? "lm" : "lm^" + std::to_string(j)));
    } else {
      for (std::size_t j = 1; j < landmarks.size(); ++j)
        out.push_back(prefix + "lm==" + format_double(landmarks[j]));
    }
    return out;
  }

  std::vector<double> values(double l) const {
    std::vector<double> out;
    if (kind == SupermodelSpec::Basis::Polynomial) {
      double v = 1.0;
      for (int j = 1; j <= degree; ++j) {
        v *= l;
        out.push_back(v);
      }
    } else {
      for (std::size_t j = 1; j < landmarks.size(); ++j)
        out.push_back(std::abs(l - landmarks[j]) <= 1e-9 ? 1.0 : 0.0);
    }
    return out;
  }
};

BasisSpec make_basis(const SupermodelSpec& spec,
                     const std::vector<double>& distinct_landmarks) {
  BasisSpec b;
  b.kind = spec.basis;
  b.degree = spec.degree;
  b.landmarks = distinct_landmarks;
  if (spec.basis == SupermodelSpec::Basis::Polynomial) {
    if (static_cast<int>(distinct_landmarks.size()) < spec.degree + 1)
      fail(errc::insufficient_landmarks,
           "polynomial basis of degree " + std::to_string(spec.degree) +
               " needs at least " + std::to_string(spec.degree + 1) +
               " distinct landmarks");
  } else if (distinct_landmarks.empty()) {
    fail(errc::insufficient_landmarks, "no landmarks");
  }
  return b;
}

LandmarkDataset rebuild_group(const StackedLandmarkDataset& stacked,
                              std::size_t begin, std::size_t end) {
  LandmarkDataset ds;
  ds.landmark = stacked.rows[begin].landmark;
  ds.window = stacked.window;
  ds.has_censoring = stacked.has_censoring;
  ds.study_horizon = stacked.study_horizon;
  for (std::size_t i = begin; i < end; ++i) ds.rows.push_back(stacked.rows[i].row);
  return ds;
}

}  // namespace

double SupermodelFit::rr_at(double l) const {
  BasisSpec basis = make_basis(spec, landmarks);
  double eta = risk_model.coefficient("exposure");
  if (spec.effect_interactions) {
    auto names = basis.names("exposure:");
    auto values = basis.values(l);
    for (std::size_t j = 0; j < names.size(); ++j)
      eta += risk_model.coefficient(names[j]) * values[j];
  }
  return std::exp(eta);
}

double SupermodelFit::prevalence_at(double l) const {
  BasisSpec basis = make_basis(spec, landmarks);
  double eta = prevalence_model.coefficient("(Intercept)") +
               prevalence_model.coefficient("outcome");
  auto values = basis.values(l);
  if (spec.intercept_interactions) {
    auto names = basis.names("");
    for (std::size_t j = 0; j < names.size(); ++j)
      eta += prevalence_model.coefficient(names[j]) * values[j];
  }
  if (spec.effect_interactions) {
    auto names = basis.names("outcome:");
    for (std::size_t j = 0; j < names.size(); ++j)
      eta += prevalence_model.coefficient(names[j]) * values[j];
  }
  return std::min(std::exp(eta), 1.0);
}

double SupermodelFit::paf_at(double l) const {
  if (l < l_min - 1e-9 || l > l_max + 1e-9)
    fail(errc::invalid_argument,
         "supermodel is evaluable between the first and last landmark only");
  double rr = rr_at(l);
  return prevalence_at(l) * (rr - 1.0) / rr;
}

std::vector<WaldRow> SupermodelFit::wald_table() const {
  std::vector<WaldRow> rows;
  auto emit = [&](const GlmFit& fit, const std::string& model) {
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
      WaldRow r;
      r.model = model;
      r.term = fit.names[j];
      r.estimate = fit.coefficients[static_cast<Eigen::Index>(j)];
      r.se = fit.se(fit.names[j]);
      r.z = r.se > 0.0 ? r.estimate / r.se
                       : std::numeric_limits<double>::quiet_NaN();
      r.p_value = std::isnan(r.z) ? r.z : normal_two_sided_p(r.z);
      rows.push_back(r);
    }
  };
  emit(risk_model, "risk");
  emit(prevalence_model, "prevalence");
  return rows;
}

SupermodelFit supermodel_fit(const StackedLandmarkDataset& stacked,
                             const SupermodelSpec& spec,
                             const std::vector<std::string>& adjustment,
                             CensoringRoute route) {
  if (stacked.rows.empty()) fail(errc::invalid_argument, "empty stacked data");

  std::vector<double> distinct = stacked.landmarks;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  BasisSpec basis = make_basis(spec, distinct);

  // group boundaries (stacked rows are ordered by landmark)
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= stacked.rows.size(); ++i) {
    if (i == stacked.rows.size() ||
        stacked.rows[i].landmark != stacked.rows[begin].landmark) {
      groups.emplace_back(begin, i);
      begin = i;
    }
  }

  bool censored = false;
  for (const auto& r : stacked.rows)
    censored |= r.row.outcome == WindowOutcome::CensoredInWindow;
  bool pseudo = route == CensoringRoute::PseudoValues ||
                (route == CensoringRoute::Auto && censored);
  if (!pseudo && censored)
    fail(errc::censoring_present,
         "censored rows present; use the pseudo-value route");

  std::vector<double> outcome(stacked.rows.size());
  for (auto [b, e] : groups) {
    if (pseudo) {
      LandmarkDataset group = rebuild_group(stacked, b, e);
      PseudoValueSet ps = pseudo_observations(group, Cause::EventOfInterest);
      for (std::size_t i = b; i < e; ++i) outcome[i] = ps.values[i - b];
    } else {
      for (std::size_t i = b; i < e; ++i)
        outcome[i] = stacked.rows[i].row.outcome == WindowOutcome::EventInWindow
                         ? 1.0
                         : 0.0;
    }
  }

  auto basis_names = basis.names("");
  const std::size_t nb = basis_names.size();

  // risk model: response = outcome, exposure effect with landmark terms
  DesignMatrix risk;
  risk.names.push_back("(Intercept)");
  if (spec.intercept_interactions)
    for (const auto& n : basis_names) risk.names.push_back(n);
  risk.names.push_back("exposure");
  if (spec.effect_interactions)
    for (const auto& n : basis.names("exposure:")) risk.names.push_back(n);
  for (const auto& a : adjustment) risk.names.push_back(a);

  const auto n = static_cast<Eigen::Index>(stacked.rows.size());
  risk.X.resize(n, static_cast<Eigen::Index>(risk.names.size()));
  Eigen::VectorXd y_risk(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& sr = stacked.rows[static_cast<std::size_t>(i)];
    auto values = basis.values(sr.landmark);
    double e = sr.row.exposure_at_l ? 1.0 : 0.0;
    Eigen::Index j = 0;
    risk.X(i, j++) = 1.0;
    if (spec.intercept_interactions)
      for (std::size_t k = 0; k < nb; ++k) risk.X(i, j++) = values[k];
    risk.X(i, j++) = e;
    if (spec.effect_interactions)
      for (std::size_t k = 0; k < nb; ++k) risk.X(i, j++) = e * values[k];
    for (const auto& a : adjustment) {
      auto it = sr.row.covariates_at_l.find(a);
      if (it == sr.row.covariates_at_l.end())
        fail(errc::missing_predictor, "covariate '" + a + "' missing");
      risk.X(i, j++) = it->second;
    }
    y_risk[i] = outcome[static_cast<std::size_t>(i)];
  }

  // prevalence model: response = exposure, outcome effect with landmark terms
  DesignMatrix prev;
  prev.names.push_back("(Intercept)");
  if (spec.intercept_interactions)
    for (const auto& n : basis_names) prev.names.push_back(n);
  prev.names.push_back("outcome");
  if (spec.effect_interactions)
    for (const auto& n : basis.names("outcome:")) prev.names.push_back(n);
  prev.X.resize(n, static_cast<Eigen::Index>(prev.names.size()));
  Eigen::VectorXd y_prev(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& sr = stacked.rows[static_cast<std::size_t>(i)];
    auto values = basis.values(sr.landmark);
    double d = outcome[static_cast<std::size_t>(i)];
    Eigen::Index j = 0;
    prev.X(i, j++) = 1.0;
    if (spec.intercept_interactions)
      for (std::size_t k = 0; k < nb; ++k) prev.X(i, j++) = values[k];
    prev.X(i, j++) = d;
    if (spec.effect_interactions)
      for (std::size_t k = 0; k < nb; ++k) prev.X(i, j++) = d * values[k];
    y_prev[i] = sr.row.exposure_at_l ? 1.0 : 0.0;
  }

  SupermodelFit fit;
  fit.spec = spec;
  fit.adjustment = adjustment;
  fit.landmarks = distinct;
  fit.l_min = distinct.front();
  fit.l_max = distinct.back();
  fit.risk_model = fit_binomial(risk, y_risk, nullptr, Link::Log);
  fit.prevalence_model = fit_binomial(prev, y_prev, nullptr, Link::Log);
  return fit;
}

namespace {

LandmarkEstimate estimate_one(const ValidatedCohort& cohort,
                              const LandmarkDataset& dataset,
                              const EstimatorConfig& cfg) {
  LandmarkEstimate pt;
  pt.landmark = dataset.landmark;
  pt.n_at_risk = static_cast<std::int64_t>(dataset.n_at_risk());
  pt.n_exposed = static_cast<std::int64_t>(dataset.n_exposed());
  pt.n_cases = static_cast<std::int64_t>(dataset.n_cases());
  switch (cfg.method) {
    case Method::LM_Miettinen: {
      PafComponents c = paf_lm(dataset, cfg.adjustment, cfg.route);
      pt.estimate = c.estimate;
      pt.prevalence = c.prevalence;
      pt.rr = c.rr;
      if (c.prevalence > 0.0 && c.prevalence < 1.0 &&
          std::isfinite(c.se_prev_logit))
        pt.delta_variance = paf_delta_variance(c.prevalence, c.rr,
                                               c.se_prev_logit, c.se_log_rr);
      break;
    }
    case Method::LM_Marginal:
      pt.estimate = paf_lm_marginal(dataset, cfg.adjustment);
      break;
    case Method::PAF0_Pseudo:
      pt.estimate =
          paf0_lm(dataset, Paf0Backend::Pseudo, cohort, cfg.ipw, cfg.route);
      break;
    case Method::PAF0_IPW: {
      IpwOptions ipw = cfg.ipw;
      if (ipw.confounders.empty()) ipw.confounders = cfg.adjustment;
      pt.estimate =
          paf0_lm(dataset, Paf0Backend::IPW, cohort, ipw, cfg.route);
      break;
    }
    case Method::Supermodel:
      fail(errc::invalid_argument, "supermodel handled at series level");
  }
  return pt;
}

}  // namespace

EstimateSeries estimate_series(const ValidatedCohort& cohort,
                               const std::vector<double>& landmarks, double h,
                               const EstimatorConfig& cfg) {
  if (landmarks.empty())
    fail(errc::no_eligible_landmarks, "no landmarks to estimate at");
  std::vector<double> grid = landmarks;
  std::sort(grid.begin(), grid.end());

  EstimateSeries series;
  series.method = cfg.method;
  series.window = h;
  series.adjustment = cfg.adjustment;
  series.points.resize(grid.size());

  std::vector<std::optional<LandmarkDataset>> datasets(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    series.points[i].landmark = grid[i];
    try {
      datasets[i] = build_landmark_dataset(cohort, grid[i], h);
      series.points[i].n_at_risk =
          static_cast<std::int64_t>(datasets[i]->n_at_risk());
      series.points[i].n_exposed =
          static_cast<std::int64_t>(datasets[i]->n_exposed());
      series.points[i].n_cases =
          static_cast<std::int64_t>(datasets[i]->n_cases());
    } catch (const Error& e) {
      series.points[i].flag = errc_name(e.code());
    }
  }

  if (cfg.method == Method::Supermodel) {
    std::vector<LandmarkDataset> built;
    for (auto& d : datasets)
      if (d) built.push_back(*d);
    if (built.empty())
      fail(errc::no_eligible_landmarks, "no landmark dataset could be built");
    StackedLandmarkDataset stacked = stack_landmarks(built);
    SupermodelFit fit =
        supermodel_fit(stacked, cfg.supermodel, cfg.adjustment, cfg.route);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!datasets[i]) continue;
      LandmarkEstimate& pt = series.points[i];
      try {
        pt.estimate = fit.paf_at(grid[i]);
        pt.prevalence = fit.prevalence_at(grid[i]);
        pt.rr = fit.rr_at(grid[i]);
      } catch (const Error& e) {
        pt.flag = errc_name(e.code());
      }
    }
    return series;
  }

  parallel_for(grid.size(), cfg.threads, [&](std::size_t i) {
    if (!datasets[i]) return;
    try {
      LandmarkEstimate pt = estimate_one(cohort, *datasets[i], cfg);
      series.points[i] = pt;
    } catch (const Error& e) {
      series.points[i].flag = errc_name(e.code());
    }
  });
  return series;
}

namespace {

ValidatedCohort resample_cohort(const ValidatedCohort& cohort, Rng& rng) {
  const std::size_t n = cohort.records.size();
  ValidatedCohort out;
  out.has_censoring = cohort.has_censoring;
  out.study_horizon = cohort.study_horizon;
  out.covariate_schema = cohort.covariate_schema;
  out.records.reserve(n);
  std::unordered_map<std::size_t, int> multiplicity;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t idx = static_cast<std::size_t>(rng.below(n));
    SubjectRecord rec = cohort.records[idx];
    rec.subject_id += "#" + std::to_string(multiplicity[idx]++);
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

EstimateSeries bootstrap_series(const ValidatedCohort& cohort,
                                const std::vector<double>& landmarks, double h,
                                const EstimatorConfig& cfg, int replicates,
                                std::uint64_t seed, double level) {
  if (replicates < 2)
    fail(errc::invalid_argument, "bootstrap needs at least 2 replicates");
  if (!(level > 0.0) || !(level < 1.0))
    fail(errc::invalid_argument, "confidence level must be in (0, 1)");

  EstimateSeries base = estimate_series(cohort, landmarks, h, cfg);
  const std::size_t L = base.points.size();

  std::vector<std::vector<double>> draws(
      static_cast<std::size_t>(replicates),
      std::vector<double>(L, std::numeric_limits<double>::quiet_NaN()));

  EstimatorConfig inner = cfg;
  inner.threads = 1;
  parallel_for(static_cast<std::size_t>(replicates), cfg.threads,
               [&](std::size_t r) {
                 Rng rng(derive_seed(seed, r));
                 ValidatedCohort replicate = resample_cohort(cohort, rng);
                 try {
                   EstimateSeries s =
                       estimate_series(replicate, landmarks, h, inner);
                   for (std::size_t i = 0; i < L; ++i)
                     if (s.points[i].ok()) draws[r][i] = s.points[i].estimate;
                 } catch (const Error&) {
                   // whole replicate failed; stays NaN everywhere
                 }
               });

  double lo_p = (1.0 - level) / 2.0;
  double hi_p = 1.0 - lo_p;
  for (std::size_t i = 0; i < L; ++i) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(replicates));
    for (int r = 0; r < replicates; ++r)
      if (std::isfinite(draws[static_cast<std::size_t>(r)][i]))
        values.push_back(draws[static_cast<std::size_t>(r)][i]);
    std::int64_t failures =
        replicates - static_cast<std::int64_t>(values.size());
    if (failures > replicates / 5)
      fail(errc::too_many_failures,
           "more than 20% of bootstrap replicates failed at landmark " +
               format_double(base.points[i].landmark) + " (" +
               std::to_string(failures) + "/" + std::to_string(replicates) +
               ")");
    base.points[i].boot_failures = failures;
    if (!values.empty() && base.points[i].ok()) {
      base.points[i].ci_low = quantile_type7(values, lo_p);
      base.points[i].ci_high = quantile_type7(values, hi_p);
      if (failures > 0)
        base.points[i].flag = "ok;boot_failures=" + std::to_string(failures);
    }
  }
  return base;
}

}  // namespace lmpaf
