#pragma once

#include <vector>

#include "lmpaf/hazards.hpp"
#include "lmpaf/types.hpp"

namespace lmpaf {

// Samples one cohort from the extended illness-death model. Waiting times are
// drawn by inversion of the integrated total hazard, the destination by the
// cause-specific rates at the sampled time. Same config, same cohort.
ValidatedCohort simulate_cohort(const HazardModelSpec& model,
                                const SimConfig& cfg);

struct StateProbs {
  double initial = 0.0;
  double exposed = 0.0;
  double event = 0.0;
  double competing = 0.0;
};

// Solves the Kolmogorov forward equations between s and t for a subject in
// the initial (or exposed) state at s. Probabilities sum to 1 within 1e-7.
StateProbs true_transition_probabilities(const HazardModelSpec& model,
                                         double s, double t,
                                         bool from_exposed);

enum class PafVariant { AtLandmark, Window };

// Model-implied PAF at landmark l with window (l, l+h].
//   AtLandmark: exposure prevented at l only (risk among unexposed-at-l as
//   reference, acquisition inside the window still possible).
//   Window: exposure removed over the whole window; reference risk is the
//   initial-state window risk with the acquisition hazard a01 zeroed.
double true_paf(const HazardModelSpec& model, double l, double h,
                PafVariant variant);

struct TruePafPoint {
  double landmark = 0.0;
  double at_landmark = 0.0;
  double window = 0.0;
};

// Oracle curve over a landmark grid; one pass over the occupancy ODE.
std::vector<TruePafPoint> true_paf_curve(const HazardModelSpec& model,
                                         const std::vector<double>& landmarks,
                                         double h);

}  // namespace lmpaf
