#pragma once

#include <string>
#include <utility>
#include <vector>

namespace twolip {

/// One scatter series: points plus an optional fitted line drawn across the
/// x-range of the plot.
struct ScatterSeries {
  std::string label;
  std::string color;  // any SVG color
  std::vector<std::pair<double, double>> points;
  bool has_line = false;
  double line_slope = 0.0;
  double line_intercept = 0.0;
};

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ScatterSeries> series;

  std::string to_svg(int width = 640, int height = 440) const;
  void write(const std::string& path, int width = 640, int height = 440) const;
};

}  // namespace twolip
