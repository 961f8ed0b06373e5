#include "lmpaf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lmpaf/errors.hpp"
#include "lmpaf/format.hpp"

namespace lmpaf {

namespace {

constexpr double kWidth = 860.0;
constexpr double kPanelHeight = 250.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 34.0, kBottom = 42.0;

std::string num(double v) {
  // limit coordinate precision so the files stay small and stable
  double r = std::round(v * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;  // normalize -0
  return format_double(r);
}

double nice_step(double range) {
  if (!(range > 0.0)) return 1.0;
  double raw = range / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  double step = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

struct Scale {
  double lo = 0.0, hi = 1.0, px0 = 0.0, px1 = 1.0;
  double operator()(double v) const {
    return px0 + (v - lo) / (hi - lo) * (px1 - px0);
  }
};

void axes(std::ostringstream& os, const Scale& x, const Scale& y,
          double panel_top, const std::string& title) {
  os << "<text x=\"" << num(kLeft) << "\" y=\"" << num(panel_top + 18)
     << "\" font-size=\"14\" font-family=\"sans-serif\">" << title
     << "</text>\n";
  double bottom = y.px0, top = y.px1;
  os << "<line x1=\"" << num(x.px0) << "\" y1=\"" << num(bottom) << "\" x2=\""
     << num(x.px1) << "\" y2=\"" << num(bottom)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << num(x.px0) << "\" y1=\"" << num(bottom) << "\" x2=\""
     << num(x.px0) << "\" y2=\"" << num(top)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  double xs = nice_step(x.hi - x.lo);
  for (double t = std::ceil(x.lo / xs) * xs; t <= x.hi + 1e-9; t += xs) {
    os << "<line x1=\"" << num(x(t)) << "\" y1=\"" << num(bottom) << "\" x2=\""
       << num(x(t)) << "\" y2=\"" << num(bottom + 4)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x(t)) << "\" y=\"" << num(bottom + 18)
       << "\" font-size=\"11\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\">"
       << format_double(t) << "</text>\n";
  }
  double ys = nice_step(y.hi - y.lo);
  for (double t = std::ceil(y.lo / ys) * ys; t <= y.hi + 1e-9; t += ys) {
    os << "<line x1=\"" << num(x.px0 - 4) << "\" y1=\"" << num(y(t))
       << "\" x2=\"" << num(x.px0) << "\" y2=\"" << num(y(t))
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x.px0 - 7) << "\" y=\"" << num(y(t) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\" "
          "font-family=\"sans-serif\">"
       << format_double(std::round(t * 1e6) / 1e6) << "</text>\n";
  }
}

}  // namespace

std::string render_estimates_svg(const std::vector<EstimateSeries>& series) {
  if (series.empty()) fail(errc::invalid_argument, "nothing to plot");

  double x_lo = 1e300, x_hi = -1e300;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      x_lo = std::min(x_lo, p.landmark);
      x_hi = std::max(x_hi, p.landmark);
    }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;

  const std::size_t panels = series.size() + 1;
  const double height = kPanelHeight * static_cast<double>(panels);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth)
     << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(kWidth)
     << " " << num(height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& es = series[s];
    double panel_top = kPanelHeight * static_cast<double>(s);
    double y_lo = 0.0, y_hi = 0.0;
    for (const auto& p : es.points) {
      for (double v : {p.estimate, p.ci_low, p.ci_high})
        if (std::isfinite(v)) {
          y_lo = std::min(y_lo, v);
          y_hi = std::max(y_hi, v);
        }
    }
    if (!(y_hi > y_lo)) { y_lo = -1.0; y_hi = 1.0; }
    double pad = 0.08 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    Scale x{x_lo, x_hi, kLeft, kWidth - kRight};
    Scale y{y_lo, y_hi, panel_top + kPanelHeight - kBottom, panel_top + kTop};
    axes(os, x, y, panel_top,
         std::string(method_name(es.method)) + " (window " +
             format_double(es.window) + ")");

    if (y_lo < 0.0 && y_hi > 0.0)
      os << "<line x1=\"" << num(x.px0) << "\" y1=\"" << num(y(0.0))
         << "\" x2=\"" << num(x.px1) << "\" y2=\"" << num(y(0.0))
         << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";

    // CI band: forward along ci_high, backward along ci_low
    std::vector<const LandmarkEstimate*> with_ci;
    for (const auto& p : es.points)
      if (std::isfinite(p.ci_low) && std::isfinite(p.ci_high))
        with_ci.push_back(&p);
    if (with_ci.size() >= 2) {
      os << "<path d=\"";
      for (std::size_t i = 0; i < with_ci.size(); ++i)
        os << (i == 0 ? "M" : "L") << num(x(with_ci[i]->landmark)) << " "
           << num(y(with_ci[i]->ci_high));
      for (std::size_t i = with_ci.size(); i-- > 0;)
        os << "L" << num(x(with_ci[i]->landmark)) << " "
           << num(y(with_ci[i]->ci_low));
      os << "Z\" fill=\"#4477aa\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
    }

    // estimate polyline, broken at flagged landmarks
    std::string seg;
    bool open = false;
    auto flush = [&]() {
      if (open) os << "<polyline points=\"" << seg
                   << "\" fill=\"none\" stroke=\"#004488\" "
                      "stroke-width=\"1.5\"/>\n";
      seg.clear();
      open = false;
    };
    for (const auto& p : es.points) {
      if (p.ok() && std::isfinite(p.estimate)) {
        seg += num(x(p.landmark)) + "," + num(y(p.estimate)) + " ";
        open = true;
      } else {
        flush();
      }
    }
    flush();
  }

  // risk-set panel from the first series' bookkeeping
  {
    const auto& es = series.front();
    double panel_top = kPanelHeight * static_cast<double>(series.size());
    double y_hi = 1.0;
    for (const auto& p : es.points)
      y_hi = std::max(y_hi,
                      static_cast<double>(p.n_at_risk - p.n_exposed));
    for (const auto& p : es.points)
      y_hi = std::max(y_hi, static_cast<double>(p.n_exposed));
    Scale x{x_lo, x_hi, kLeft, kWidth - kRight};
    Scale y{0.0, y_hi * 1.08, panel_top + kPanelHeight - kBottom,
            panel_top + kTop};
    axes(os, x, y, panel_top, "at risk by exposure group, cases in window");

    double slot = es.points.size() > 1
                      ? (x.px1 - x.px0) / static_cast<double>(es.points.size())
                      : (x.px1 - x.px0);
    double bw = std::max(1.0, std::min(8.0, slot * 0.35));
    for (const auto& p : es.points) {
      double cx = x(p.landmark);
      double un = static_cast<double>(p.n_at_risk - p.n_exposed);
      double ex = static_cast<double>(p.n_exposed);
      os << "<rect x=\"" << num(cx - bw) << "\" y=\"" << num(y(un))
         << "\" width=\"" << num(bw) << "\" height=\"" << num(y(0.0) - y(un))
         << "\" fill=\"#bbbbbb\"/>\n";
      os << "<rect x=\"" << num(cx) << "\" y=\"" << num(y(ex)) << "\" width=\""
         << num(bw) << "\" height=\"" << num(y(0.0) - y(ex))
         << "\" fill=\"#222222\"/>\n";
    }
    std::string pts;
    for (const auto& p : es.points)
      pts += num(x(p.landmark)) + "," +
             num(y(static_cast<double>(p.n_cases))) + " ";
    os << "<polyline points=\"" << pts
       << "\" fill=\"none\" stroke=\"#aa3377\" stroke-width=\"1.5\"/>\n";
  }

  os << "</svg>\n";
  return os.str();
}

void write_estimates_svg(const std::vector<EstimateSeries>& series,
                         const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open '" + path + "' for writing");
  f << render_estimates_svg(series);
  if (!f) fail(errc::io_error, "failed writing '" + path + "'");
}

}  // namespace lmpaf
