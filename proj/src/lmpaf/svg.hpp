#pragma once

#include <string>
#include <vector>

#include "lmpaf/paf.hpp"

namespace lmpaf {

// Static, fixed-layout SVG: one panel per method (estimate with CI band over
// the landmarks) plus a risk-set panel with at-risk counts by exposure group
// and the case counts. Output is deterministic for identical input.
std::string render_estimates_svg(const std::vector<EstimateSeries>& series);

void write_estimates_svg(const std::vector<EstimateSeries>& series,
                         const std::string& path);

}  // namespace lmpaf
