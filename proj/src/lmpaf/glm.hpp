#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lmpaf/types.hpp"

namespace lmpaf {

enum class Link { Log, Logit };

struct DesignMatrix {
  std::vector<std::string> names;  // column names, "(Intercept)" first
  Eigen::MatrixXd X;               // n x p, categorical columns pre-expanded
};

struct GlmFit {
  Link link = Link::Logit;
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;  // information inverse at the optimum
  bool converged = false;
  int iterations = 0;
  double max_abs_score = 0.0;
  double deviance = 0.0;

  double coefficient(const std::string& name) const;
  double se(const std::string& name) const;
};

// Binomial-response maximum likelihood by IRLS with step-halving. Responses
// may be real-valued: 0/1 outcomes, probabilities, and jackknife
// pseudo-values (which can fall outside [0,1]) are all fitted through the
// same estimating equations. For the log link every iterate is kept strictly
// below mean 1. Throws NotConverged / RankDeficientDesign / Separation.
GlmFit fit_binomial(const DesignMatrix& design, const Eigen::VectorXd& response,
                    const Eigen::VectorXd* weights, Link link);

struct Prediction {
  double probability = 0.0;
  bool clamped = false;  // log-link prediction exceeded 1 and was clamped
};

Prediction predict_prob(const GlmFit& fit, const CovariateMap& row);

struct RiskRatioEstimate {
  double rr = 0.0;
  double se_log_rr = 0.0;
  GlmFit fit;
};

// Eq-style log-binomial risk ratio of the window outcome for exposed vs
// unexposed at the landmark, optionally covariate-adjusted. With censored
// rows the caller must pass the pseudo-value response instead (the complete
// -data route refuses them).
RiskRatioEstimate risk_ratio_at_landmark(
    const LandmarkDataset& dataset, const std::vector<std::string>& adjustment,
    const std::vector<double>* response_override = nullptr);

// Proportion of exposed among the cases in the window (complete data).
double prevalence_among_cases(const LandmarkDataset& dataset);

struct PrevalenceFit {
  double value = 0.0;   // exp(a0 + a1), clamped to 1
  double se_log = 0.0;  // standard error of log(value)
  GlmFit fit;
};

// Same estimand via the log-binomial regression of exposure on the outcome
// value, evaluated at outcome 1; used for the pseudo-value route and as the
// cross-check of the direct proportion.
PrevalenceFit prevalence_among_cases_model(
    const LandmarkDataset& dataset, const std::vector<double>& outcome_values);

double prevalence_among_cases_glm(const LandmarkDataset& dataset,
                                  const std::vector<double>& outcome_values);

// First-order delta-method variance of prevalence*(rr-1)/rr with the two
// components treated as independent; the bootstrap is the default CI method
// and this is reported alongside it.
double paf_delta_variance(double prevalence, double rr, double se_prev_logit,
                          double se_log_rr);

// Design helper: intercept (+ exposure) + adjustment columns at the landmark.
DesignMatrix landmark_design(const LandmarkDataset& dataset,
                             const std::vector<std::string>& adjustment,
                             bool include_exposure);

}  // namespace lmpaf
