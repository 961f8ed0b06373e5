#include "lmpaf/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmpaf/errors.hpp"

namespace lmpaf {

namespace {

constexpr double kScoreTol = 1e-8;
constexpr double kDevianceTol = 1e-10;
constexpr double kMeanCeiling = 1.0 - 1e-10;
constexpr double kLinearPredictorBound = 30.0;
constexpr int kMaxIterations = 100;

double clamp01(double p) {
  return std::min(std::max(p, 1e-12), 1.0 - 1e-12);
}

Eigen::VectorXd mean_of(Link link, const Eigen::VectorXd& eta) {
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    mu[i] = link == Link::Log ? std::exp(eta[i])
                              : 1.0 / (1.0 + std::exp(-eta[i]));
  return mu;
}

// -2 * binomial log-likelihood kernel; valid for real-valued responses.
double working_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                        const Eigen::VectorXd& w) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double m = clamp01(mu[i]);
    dev -= 2.0 * w[i] * (y[i] * std::log(m) + (1.0 - y[i]) * std::log1p(-m));
  }
  return dev;
}

void check_full_rank(const DesignMatrix& design) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
  qr.setThreshold(1e-10);
  Eigen::Index rank = qr.rank();
  if (rank < design.X.cols()) {
    Eigen::Index offending = qr.colsPermutation().indices()[rank];
    fail(errc::rank_deficient_design,
         "column '" + design.names[static_cast<std::size_t>(offending)] +
             "' is linearly dependent");
  }
}

}  // namespace

double GlmFit::coefficient(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return coefficients[static_cast<Eigen::Index>(j)];
  fail(errc::missing_predictor, "no coefficient named '" + name + "'");
}

double GlmFit::se(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) {
      auto k = static_cast<Eigen::Index>(j);
      return std::sqrt(std::max(covariance(k, k), 0.0));
    }
  fail(errc::missing_predictor, "no coefficient named '" + name + "'");
}

GlmFit fit_binomial(const DesignMatrix& design, const Eigen::VectorXd& response,
                    const Eigen::VectorXd* weights, Link link) {
  const Eigen::Index n = design.X.rows();
  const Eigen::Index p = design.X.cols();
  if (n == 0 || p == 0) fail(errc::invalid_argument, "empty design");
  if (response.size() != n)
    fail(errc::invalid_argument, "response length does not match design");
  Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(n);
  if (w.size() != n)
    fail(errc::invalid_argument, "weight length does not match design");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(w[i] >= 0.0)) fail(errc::invalid_argument, "negative weight");
    if (!std::isfinite(response[i]))
      fail(errc::invalid_argument, "non-finite response");
  }
  if (n < p)
    fail(errc::rank_deficient_design,
         "fewer rows than columns (" + std::to_string(n) + " < " +
             std::to_string(p) + ")");
  check_full_rank(design);

  // start at the (weighted) response mean on the link scale, slopes at zero
  double wsum = w.sum();
  if (!(wsum > 0.0)) fail(errc::invalid_argument, "all weights are zero");
  double ybar = w.dot(response) / wsum;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  bool has_intercept = false;
  for (std::size_t j = 0; j < design.names.size(); ++j)
    if (design.names[j] == "(Intercept)") {
      double m = link == Link::Log ? std::min(std::max(ybar, 1e-10), kMeanCeiling)
                                   : std::min(std::max(ybar, 1e-6), 1.0 - 1e-6);
      beta[static_cast<Eigen::Index>(j)] =
          link == Link::Log ? std::log(m) : std::log(m / (1.0 - m));
      has_intercept = true;
      break;
    }
  (void)has_intercept;

  Eigen::VectorXd eta = design.X * beta;
  Eigen::VectorXd mu = mean_of(link, eta);
  double deviance = working_deviance(response, mu, w);

  GlmFit fit;
  fit.link = link;
  fit.names = design.names;

  auto score_of = [&](const Eigen::VectorXd& mu_) {
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i)
      s[i] = link == Link::Log ? w[i] * (response[i] - mu_[i]) / (1.0 - mu_[i])
                               : w[i] * (response[i] - mu_[i]);
    return Eigen::VectorXd(design.X.transpose() * s);
  };

  int polish_left = -1;
  int iteration = 0;
  double max_score = std::numeric_limits<double>::infinity();
  for (; iteration < kMaxIterations; ++iteration) {
    Eigen::VectorXd score = score_of(mu);
    max_score = score.cwiseAbs().maxCoeff();
    if (max_score <= kScoreTol) {
      if (polish_left < 0) polish_left = 2;  // sharpen identities below 1e-8
      if (polish_left == 0 || max_score <= 1e-14) break;
      --polish_left;
    }
    if (eta.cwiseAbs().maxCoeff() > kLinearPredictorBound &&
        max_score > kScoreTol)
      fail(errc::separation, "linear predictor diverged beyond ±" +
                                 std::to_string(kLinearPredictorBound));

    // Fisher information with IRLS working weights
    Eigen::VectorXd irls(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = clamp01(mu[i]);
      irls[i] = link == Link::Log ? w[i] * m / (1.0 - m)
                                  : w[i] * m * (1.0 - m);
    }
    Eigen::MatrixXd info = design.X.transpose() * irls.asDiagonal() * design.X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success)
      fail(errc::not_converged, "information matrix not factorizable");
    Eigen::VectorXd delta = ldlt.solve(score);

    // step-halving: keep log-link means < 1 and never increase the deviance
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half, step *= 0.5) {
      Eigen::VectorXd beta_try = beta + step * delta;
      Eigen::VectorXd eta_try = design.X * beta_try;
      Eigen::VectorXd mu_try = mean_of(link, eta_try);
      if (link == Link::Log && mu_try.maxCoeff() >= kMeanCeiling) continue;
      if (!mu_try.allFinite()) continue;
      double dev_try = working_deviance(response, mu_try, w);
      if (!std::isfinite(dev_try)) continue;
      if (dev_try <= deviance + 1e-12 || polish_left >= 0) {
        double rel_change = std::abs(deviance - dev_try) /
                            (std::abs(deviance) + 1e-300);
        beta = std::move(beta_try);
        eta = std::move(eta_try);
        mu = std::move(mu_try);
        bool stalled = rel_change < kDevianceTol && step == 1.0;
        deviance = dev_try;
        accepted = true;
        if (stalled && polish_left < 0) {
          Eigen::VectorXd s = score_of(mu);
          if (s.cwiseAbs().maxCoeff() <= kScoreTol) polish_left = 0;
        }
        break;
      }
    }
    if (!accepted) {
      // no admissible step improves the deviance; accept only if solved
      Eigen::VectorXd s = score_of(mu);
      max_score = s.cwiseAbs().maxCoeff();
      if (max_score <= kScoreTol) break;
      fail(errc::not_converged,
           "step-halving exhausted at iteration " + std::to_string(iteration) +
               ", max |score| = " + std::to_string(max_score));
    }
  }

  Eigen::VectorXd score = score_of(mu);
  fit.max_abs_score = score.cwiseAbs().maxCoeff();
  if (fit.max_abs_score > kScoreTol)
    fail(errc::not_converged,
         "IRLS did not converge in " + std::to_string(iteration) +
             " iterations, max |score| = " + std::to_string(fit.max_abs_score));
  fit.converged = true;
  fit.iterations = iteration;
  fit.coefficients = beta;
  fit.deviance = deviance;

  Eigen::VectorXd irls(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = clamp01(mu[i]);
    irls[i] =
        link == Link::Log ? w[i] * m / (1.0 - m) : w[i] * m * (1.0 - m);
  }
  Eigen::MatrixXd info = design.X.transpose() * irls.asDiagonal() * design.X;
  fit.covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  return fit;
}

Prediction predict_prob(const GlmFit& fit, const CovariateMap& row) {
  double eta = 0.0;
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    double x;
    if (fit.names[j] == "(Intercept)") {
      x = 1.0;
    } else {
      auto it = row.find(fit.names[j]);
      if (it == row.end())
        fail(errc::missing_predictor,
             "prediction row lacks '" + fit.names[j] + "'");
      x = it->second;
    }
    eta += x * fit.coefficients[static_cast<Eigen::Index>(j)];
  }
  if (fit.link == Link::Logit) return {1.0 / (1.0 + std::exp(-eta)), false};
  double p = std::exp(eta);
  if (p > 1.0) return {1.0, true};
  return {p, false};
}

DesignMatrix landmark_design(const LandmarkDataset& dataset,
                             const std::vector<std::string>& adjustment,
                             bool include_exposure) {
  DesignMatrix d;
  d.names.push_back("(Intercept)");
  if (include_exposure) d.names.push_back("exposure");
  for (const auto& a : adjustment) d.names.push_back(a);

  const auto n = static_cast<Eigen::Index>(dataset.rows.size());
  d.X.resize(n, static_cast<Eigen::Index>(d.names.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = dataset.rows[static_cast<std::size_t>(i)];
    Eigen::Index j = 0;
    d.X(i, j++) = 1.0;
    if (include_exposure) d.X(i, j++) = row.exposure_at_l ? 1.0 : 0.0;
    for (const auto& a : adjustment) {
      auto it = row.covariates_at_l.find(a);
      if (it == row.covariates_at_l.end())
        fail(errc::missing_predictor, "subject '" + row.subject_id +
                                          "' lacks covariate '" + a + "'");
      d.X(i, j++) = it->second;
    }
  }
  return d;
}

RiskRatioEstimate risk_ratio_at_landmark(
    const LandmarkDataset& dataset, const std::vector<std::string>& adjustment,
    const std::vector<double>* response_override) {
  std::size_t exposed = dataset.n_exposed();
  if (exposed == 0 || exposed == dataset.rows.size())
    fail(errc::invalid_argument,
         "risk ratio needs at least one exposed and one unexposed subject");

  Eigen::VectorXd y(static_cast<Eigen::Index>(dataset.rows.size()));
  if (response_override) {
    if (response_override->size() != dataset.rows.size())
      fail(errc::invalid_argument, "response override length mismatch");
    for (std::size_t i = 0; i < dataset.rows.size(); ++i)
      y[static_cast<Eigen::Index>(i)] = (*response_override)[i];
  } else {
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
      const auto& row = dataset.rows[i];
      if (row.outcome == WindowOutcome::CensoredInWindow)
        fail(errc::censoring_present,
             "censored rows present; use the pseudo-value route");
      y[static_cast<Eigen::Index>(i)] =
          row.outcome == WindowOutcome::EventInWindow ? 1.0 : 0.0;
    }
  }

  DesignMatrix design = landmark_design(dataset, adjustment, true);
  GlmFit fit = fit_binomial(design, y, nullptr, Link::Log);
  RiskRatioEstimate est;
  est.rr = std::exp(fit.coefficient("exposure"));
  est.se_log_rr = fit.se("exposure");
  est.fit = std::move(fit);
  return est;
}

double prevalence_among_cases(const LandmarkDataset& dataset) {
  std::size_t cases = 0, exposed_cases = 0;
  for (const auto& row : dataset.rows) {
    if (row.outcome == WindowOutcome::EventInWindow) {
      ++cases;
      exposed_cases += row.exposure_at_l ? 1 : 0;
    }
  }
  if (cases == 0)
    fail(errc::no_cases, "no events inside the window");
  return static_cast<double>(exposed_cases) / static_cast<double>(cases);
}

PrevalenceFit prevalence_among_cases_model(
    const LandmarkDataset& dataset, const std::vector<double>& outcome_values) {
  if (outcome_values.size() != dataset.rows.size())
    fail(errc::invalid_argument, "outcome values length mismatch");
  double case_mass = 0.0;
  for (double v : outcome_values) case_mass += std::max(v, 0.0);
  if (!(case_mass > 0.0))
    fail(errc::no_cases, "no case mass inside the window");

  DesignMatrix d;
  d.names = {"(Intercept)", "outcome"};
  const auto n = static_cast<Eigen::Index>(dataset.rows.size());
  d.X.resize(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    d.X(i, 1) = outcome_values[static_cast<std::size_t>(i)];
    y[i] = dataset.rows[static_cast<std::size_t>(i)].exposure_at_l ? 1.0 : 0.0;
  }
  PrevalenceFit out;
  out.fit = fit_binomial(d, y, nullptr, Link::Log);
  out.value = std::min(std::exp(out.fit.coefficients[0] + out.fit.coefficients[1]), 1.0);
  const auto& v = out.fit.covariance;
  out.se_log = std::sqrt(std::max(v(0, 0) + v(1, 1) + 2.0 * v(0, 1), 0.0));
  return out;
}

double prevalence_among_cases_glm(const LandmarkDataset& dataset,
                                  const std::vector<double>& outcome_values) {
  return prevalence_among_cases_model(dataset, outcome_values).value;
}

double paf_delta_variance(double prevalence, double rr, double se_prev_logit,
                          double se_log_rr) {
  if (!(rr > 0.0)) fail(errc::invalid_argument, "risk ratio must be positive");
  if (!(prevalence > 0.0) || !(prevalence < 1.0))
    fail(errc::degenerate_inputs,
         "prevalence on the boundary has no delta-method variance");
  double d_prev = (1.0 - 1.0 / rr) * prevalence * (1.0 - prevalence);
  double d_logrr = prevalence / rr;
  return d_prev * d_prev * se_prev_logit * se_prev_logit +
         d_logrr * d_logrr * se_log_rr * se_log_rr;
}

}  // namespace lmpaf
