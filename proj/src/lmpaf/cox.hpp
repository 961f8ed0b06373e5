#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lmpaf/survival.hpp"

namespace lmpaf {

// Counting-process input: each row contributes risk time on (start, stop]
// and optionally an event of the target cause at stop.
struct CoxRow {
  std::int32_t subject = 0;  // groups rows for the sandwich covariance
  double start = 0.0;
  double stop = 0.0;
  bool event = false;
  double weight = 1.0;
};

struct CoxData {
  std::vector<CoxRow> rows;
  Eigen::MatrixXd X;  // rows x p, p == 0 permitted (baseline-only model)
  std::vector<std::string> names;
  std::uint64_t grid_id = 0;  // identifies the originating person-time table
};

struct CoxFit {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;        // robust, grouped by subject
  Eigen::MatrixXd model_covariance;  // observed-information inverse
  StepFunction baseline_cumhaz;      // weighted Breslow, covariates at zero
  bool converged = false;
  int iterations = 0;
  double max_abs_score = 0.0;
  double loglik = 0.0;
  std::uint64_t grid_id = 0;
};

// Weighted partial-likelihood maximization (Breslow ties) by damped
// Newton-Raphson. Throws NotConverged / Separation / RankDeficientDesign.
CoxFit fit_cox(const CoxData& data);

// Weighted Breslow partial log-likelihood at beta; the grid-search oracle in
// the tests drives this directly.
double cox_partial_loglik(const CoxData& data, const Eigen::VectorXd& beta);

}  // namespace lmpaf
