#include "twolip/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace twolip {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void absorb(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    double span = hi - lo;
    if (span <= 0.0) span = std::max(1.0, std::abs(hi));
    lo -= 0.05 * span;
    hi += 0.05 * span;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

/// Round tick step to 1/2/5 times a power of ten.
double tick_step(double span) {
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double frac = raw / mag;
  double nice = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

}  // namespace

std::string ScatterPlot::to_svg(int width, int height) const {
  const double ml = 64, mr = 16, mt = 34, mb = 48;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;

  Range xr, yr;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xr.absorb(x);
      yr.absorb(y);
    }
  for (const auto& s : series)
    if (s.has_line && xr.lo <= xr.hi) {
      yr.absorb(s.line_slope * xr.lo + s.line_intercept);
      yr.absorb(s.line_slope * xr.hi + s.line_intercept);
    }
  xr.pad();
  yr.pad();

  auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2.0 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";

  // Axes with 1/2/5 ticks.
  svg << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  svg << "<path d=\"M" << ml << " " << mt << " V" << mt + ph << " H" << ml + pw
      << "\"/>\n</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  double xstep = tick_step(xr.hi - xr.lo);
  for (double t = std::ceil(xr.lo / xstep) * xstep; t <= xr.hi + 1e-12;
       t += xstep) {
    svg << "<line x1=\"" << px(t) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(t)
        << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << px(t) << "\" y=\"" << mt + ph + 16
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  double ystep = tick_step(yr.hi - yr.lo);
  for (double t = std::ceil(yr.lo / ystep) * ystep; t <= yr.hi + 1e-12;
       t += ystep) {
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(t) << "\" x2=\"" << ml
        << "\" y2=\"" << py(t) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(t) + 4
        << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  svg << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << mt + ph / 2
      << ")\">" << y_label << "</text>\n";
  svg << "</g>\n";

  double legend_y = mt + 8;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points)
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
          << "\" r=\"2.5\" fill=\"" << s.color << "\" fill-opacity=\"0.7\"/>\n";
    if (s.has_line)
      svg << "<line x1=\"" << px(xr.lo) << "\" y1=\""
          << py(s.line_slope * xr.lo + s.line_intercept) << "\" x2=\"" << px(xr.hi)
          << "\" y2=\"" << py(s.line_slope * xr.hi + s.line_intercept)
          << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
    if (!s.label.empty()) {
      svg << "<circle cx=\"" << ml + pw - 130 << "\" cy=\"" << legend_y
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      svg << "<text x=\"" << ml + pw - 122 << "\" y=\"" << legend_y + 4
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">"
          << s.label << "</text>\n";
      legend_y += 16;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void ScatterPlot::write(const std::string& path, int width, int height) const {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("svg: cannot open " + path + " for writing");
  file << to_svg(width, height);
  if (!file) throw std::runtime_error("svg: write to " + path + " failed");
}

}  // namespace twolip
