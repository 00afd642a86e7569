#pragma once

#include <string>
#include <vector>

namespace gmentropy {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart with a log10 y axis. Non-positive y values
/// are dropped from their polyline.
std::string line_chart_svg(const std::vector<PlotSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

}  // namespace gmentropy
