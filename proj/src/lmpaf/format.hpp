#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace lmpaf {

// Shortest round-trip decimal representation; keeps every CSV byte-stable
// across runs and platforms.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace lmpaf
