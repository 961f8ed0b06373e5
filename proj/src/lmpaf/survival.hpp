#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmpaf/types.hpp"

namespace lmpaf {

struct StepFunction {
  double initial_value = 0.0;
  std::vector<double> times;   // strictly increasing jump times
  std::vector<double> values;  // value from times[i] onward (right-continuous)

  double operator()(double t) const;
};

struct ConditionalCIF {
  double landmark = 0.0;
  double window = 0.0;
  StepFunction curve;          // cumulative incidence on (l, l+h]
  double at_window_end = 0.0;  // curve evaluated at l+h
};

// Aalen-Johansen estimate of P(event of the given cause in (l, l+h] | at risk
// at l) on the landmark dataset. Survivors past the window contribute risk
// time through l+h; ties process events before censorings.
ConditionalCIF conditional_cif(const LandmarkDataset& dataset, Cause cause);

struct PseudoValueSet {
  double landmark = 0.0;
  double window = 0.0;
  std::vector<std::string> subject_ids;  // aligned with values
  std::vector<double> values;
  double full_sample_estimate = 0.0;
  std::int64_t n_used = 0;
};

// Leave-one-out jackknife pseudo-observations of the window outcome under
// censoring:  n * F(l+h|l) - (n-1) * F^(-i)(l+h|l). Values are exact (the
// closed-form recomputation is algebraically identical to deleting the row)
// and may legitimately fall outside [0, 1].
PseudoValueSet pseudo_observations(const LandmarkDataset& dataset, Cause cause);

// Pseudo-observations of the counterfactual window outcome: computed on the
// rows unexposed at the landmark, with acquisition of the exposure inside the
// window treated as censoring at the acquisition time.
PseudoValueSet pseudo_observations_counterfactual(
    const LandmarkDataset& dataset);

}  // namespace lmpaf
