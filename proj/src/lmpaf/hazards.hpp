#pragma once

#include <cstdint>
#include <optional>

#include "lmpaf/types.hpp"

namespace lmpaf {

struct HazardSpec {
  enum class Kind { Constant, Weibull };
  Kind kind = Kind::Constant;
  double rate = 0.0;   // Constant: events per time unit
  double shape = 1.0;  // Weibull k
  double scale = 1.0;  // Weibull b (time units)

  static HazardSpec constant(double rate);
  static HazardSpec weibull(double shape, double scale);
};

// Instantaneous rate at t. A Weibull with shape < 1 diverges at t = 0; the
// value +infinity is returned there and callers integrate across it.
double hazard_eval(const HazardSpec& spec, double t);

// Integral of the hazard over [t0, t1], closed form.
double cumulative_hazard(const HazardSpec& spec, double t0, double t1);

// Transitions of the extended illness-death model:
//   initial -> exposed (a01), initial -> event (a02), initial -> competing
//   (a03), exposed -> event (a14), exposed -> competing (a15).
struct HazardModelSpec {
  HazardSpec a01, a02, a03, a14, a15;
};

// Solves cumhaz(t0, t0 + w) = target for w >= 0 where cumhaz sums the given
// specs; closed form when all are constant, otherwise bracketed Newton to
// absolute tolerance 1e-10. Returns infinity when the total mass runs out.
double invert_cumulative_hazard(const HazardSpec* specs, int count, double t0,
                                double target);

struct SimConfig {
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  // administrative end of follow-up; subjects event-free at the horizon are
  // recorded with event_type 0 at final_time = horizon
  double horizon = 0.0;
  std::optional<double> censoring_rate;  // independent exponential, off by default
};

}  // namespace lmpaf
