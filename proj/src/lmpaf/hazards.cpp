#include "lmpaf/hazards.hpp"

#include <cmath>
#include <limits>

#include "lmpaf/errors.hpp"

namespace lmpaf {

HazardSpec HazardSpec::constant(double rate) {
  if (!(rate > 0.0)) fail(errc::invalid_argument, "constant rate must be > 0");
  HazardSpec s;
  s.kind = Kind::Constant;
  s.rate = rate;
  return s;
}

HazardSpec HazardSpec::weibull(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    fail(errc::invalid_argument, "Weibull shape and scale must be > 0");
  HazardSpec s;
  s.kind = Kind::Weibull;
  s.shape = shape;
  s.scale = scale;
  return s;
}

double hazard_eval(const HazardSpec& spec, double t) {
  if (t < 0.0) fail(errc::invalid_argument, "hazard queried at negative time");
  if (spec.kind == HazardSpec::Kind::Constant) return spec.rate;
  if (t == 0.0) {
    if (spec.shape < 1.0) return std::numeric_limits<double>::infinity();
    if (spec.shape == 1.0) return 1.0 / spec.scale;
    return 0.0;
  }
  return (spec.shape / spec.scale) *
         std::pow(t / spec.scale, spec.shape - 1.0);
}

double cumulative_hazard(const HazardSpec& spec, double t0, double t1) {
  if (t1 < t0) fail(errc::invalid_argument, "reversed integration interval");
  if (spec.kind == HazardSpec::Kind::Constant) return spec.rate * (t1 - t0);
  return std::pow(t1 / spec.scale, spec.shape) -
         std::pow(t0 / spec.scale, spec.shape);
}

namespace {

double total_cumhaz(const HazardSpec* specs, int count, double t0, double t1) {
  double sum = 0.0;
  for (int i = 0; i < count; ++i) sum += cumulative_hazard(specs[i], t0, t1);
  return sum;
}

double total_rate(const HazardSpec* specs, int count, double t) {
  double sum = 0.0;
  for (int i = 0; i < count; ++i) sum += hazard_eval(specs[i], t);
  return sum;
}

}  // namespace

double invert_cumulative_hazard(const HazardSpec* specs, int count, double t0,
                                double target) {
  if (!(target >= 0.0))
    fail(errc::invalid_argument, "cumulative hazard target must be >= 0");
  if (target == 0.0) return 0.0;

  bool all_constant = true;
  double rate_sum = 0.0;
  for (int i = 0; i < count; ++i) {
    if (specs[i].kind != HazardSpec::Kind::Constant) all_constant = false;
    else rate_sum += specs[i].rate;
  }
  if (all_constant) {
    if (rate_sum <= 0.0) return std::numeric_limits<double>::infinity();
    return target / rate_sum;
  }

  // bracket [lo, hi] with total_cumhaz(t0, t0+hi) >= target
  double hi = 1.0;
  const double kMaxSpan = 1e12;
  while (total_cumhaz(specs, count, t0, t0 + hi) < target) {
    hi *= 2.0;
    if (hi > kMaxSpan) return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0;

  // safeguarded Newton on g(w) = cumhaz(t0, t0+w) - target
  double w = hi * 0.5;
  for (int iter = 0; iter < 200; ++iter) {
    double g = total_cumhaz(specs, count, t0, t0 + w) - target;
    if (g > 0.0) hi = w; else lo = w;
    if (hi - lo < 1e-10) break;
    double rate = total_rate(specs, count, t0 + w);
    double step = (std::isfinite(rate) && rate > 0.0) ? g / rate : 0.0;
    double next = w - step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);  // bisect
    w = next;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lmpaf
