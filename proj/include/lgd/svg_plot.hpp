#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lgd {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct PlotOptions {
  std::string title;
  std::string x_label = "round";
  std::string y_label = "loss";
  bool log_y = true;
  // Rendering-only floor for the log scale; data files are untouched.
  double y_floor = 1e-16;
};

// Standalone SVG line chart: labeled axes, one polyline per series, legend
// from the series names. Throws std::invalid_argument on an empty series
// list or series without points.
void write_svg_plot(const std::vector<PlotSeries>& series, const std::string& path,
                    const PlotOptions& options = {});

}  // namespace lgd
