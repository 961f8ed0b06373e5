#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lmpaf/glm.hpp"
#include "lmpaf/ipw.hpp"
#include "lmpaf/types.hpp"

namespace lmpaf {

enum class Method {
  LM_Miettinen,  // prevalence-among-cases x (RR-1)/RR at each landmark
  LM_Marginal,   // marginal vs unexposed-conditional window risks
  PAF0_Pseudo,   // counterfactual risk from exposure-censoring pseudo-values
  PAF0_IPW,      // counterfactual risk from weighted cause-specific Cox
  Supermodel,    // pooled quadratic-landmark log models on the stacked data
};

const char* method_name(Method m) noexcept;
std::optional<Method> method_from_name(const std::string& name);

enum class CensoringRoute { Auto, Complete, PseudoValues };

struct LandmarkEstimate {
  double landmark = 0.0;
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  std::int64_t n_at_risk = 0;
  std::int64_t n_exposed = 0;
  std::int64_t n_cases = 0;
  std::string flag = "ok";
  // components, filled where the method provides them
  double prevalence = std::numeric_limits<double>::quiet_NaN();
  double rr = std::numeric_limits<double>::quiet_NaN();
  double delta_variance = std::numeric_limits<double>::quiet_NaN();
  std::int64_t boot_failures = 0;

  bool ok() const { return flag.rfind("ok", 0) == 0; }
};

struct EstimateSeries {
  Method method = Method::LM_Miettinen;
  double window = 0.0;
  std::vector<std::string> adjustment;
  std::vector<LandmarkEstimate> points;
};

struct SupermodelSpec {
  enum class Basis { Polynomial, Indicator };
  Basis basis = Basis::Polynomial;
  int degree = 2;                     // polynomial basis degree
  bool intercept_interactions = true; // landmark terms on the baseline part
  bool effect_interactions = true;    // landmark terms on the effect part
};

struct EstimatorConfig {
  Method method = Method::LM_Miettinen;
  std::vector<std::string> adjustment;
  CensoringRoute route = CensoringRoute::Auto;
  IpwOptions ipw;
  SupermodelSpec supermodel;
  unsigned threads = 1;
};

struct PafComponents {
  double estimate = 0.0;
  double prevalence = 0.0;
  double rr = 0.0;
  double se_log_rr = 0.0;
  double se_prev_logit = 0.0;
};

// Miettinen form: prevalence among cases x (RR-1)/RR. The pseudo-value route
// substitutes jackknife pseudo-observations as the regression response.
PafComponents paf_lm(const LandmarkDataset& dataset,
                     const std::vector<std::string>& adjustment,
                     CensoringRoute route = CensoringRoute::Auto);

// Marginal-risk form of the same estimand: both risks by Aalen-Johansen;
// the adjusted route fits cause-specific Cox models on the unexposed-at-l
// stratum and standardizes over the at-risk population.
double paf_lm_marginal(const LandmarkDataset& dataset,
                       const std::vector<std::string>& adjustment);

enum class Paf0Backend { Pseudo, IPW };

// Counterfactual estimand: exposure removed over the whole window. The
// numerator risk comes from an intercept-only fit on the (pseudo-)outcomes.
double paf0_lm(const LandmarkDataset& dataset, Paf0Backend backend,
               const ValidatedCohort& cohort, const IpwOptions& ipw,
               CensoringRoute route = CensoringRoute::Auto);

struct WaldRow {
  std::string model;  // "risk" or "prevalence"
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 0.0;
};

struct SupermodelFit {
  SupermodelSpec spec;
  std::vector<std::string> adjustment;
  std::vector<double> landmarks;  // distinct, ascending
  double l_min = 0.0, l_max = 0.0;
  GlmFit risk_model;
  GlmFit prevalence_model;

  double rr_at(double l) const;
  double prevalence_at(double l) const;
  double paf_at(double l) const;  // evaluable on [l_min, l_max]
  std::vector<WaldRow> wald_table() const;
};

SupermodelFit supermodel_fit(const StackedLandmarkDataset& stacked,
                             const SupermodelSpec& spec,
                             const std::vector<std::string>& adjustment,
                             CensoringRoute route = CensoringRoute::Auto);

// Per-landmark estimation for the chosen method with risk-set bookkeeping;
// failures at single landmarks become flags, not crashes.
EstimateSeries estimate_series(const ValidatedCohort& cohort,
                               const std::vector<double>& landmarks, double h,
                               const EstimatorConfig& cfg);

// Cluster bootstrap over subjects: the whole pipeline (landmark construction,
// weights, fits) is re-run per replicate; percentile intervals at the given
// level. Replicates that fail at a landmark are excluded there and counted.
EstimateSeries bootstrap_series(const ValidatedCohort& cohort,
                                const std::vector<double>& landmarks, double h,
                                const EstimatorConfig& cfg, int replicates,
                                std::uint64_t seed, double level = 0.95);

}  // namespace lmpaf
