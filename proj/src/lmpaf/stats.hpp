#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lmpaf/errors.hpp"

namespace lmpaf {

// Linear-interpolation sample quantile (R type 7).
inline double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) fail(errc::invalid_argument, "quantile of empty set");
  std::sort(v.begin(), v.end());
  double h = (static_cast<double>(v.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace lmpaf
