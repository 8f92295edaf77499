#include "lgd/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lgd {

namespace {

constexpr int kWidth = 820, kHeight = 520;
constexpr int kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::vector<PlotSeries>& series, const std::string& path,
                    const PlotOptions& options) {
  if (series.empty()) throw std::invalid_argument("svg plot: no series");
  for (const auto& s : series)
    if (s.points.empty()) throw std::invalid_argument("svg plot: empty series " + s.name);

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      const double yy = options.log_y ? std::log10(std::max(y, options.y_floor)) : y;
      if (first) {
        xmin = xmax = x;
        ymin = ymax = yy;
        first = false;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, yy);
        ymax = std::max(ymax, yy);
      }
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) {
    const double yy = options.log_y ? std::log10(std::max(y, options.y_floor)) : y;
    return kTop + (ymax - yy) / (ymax - ymin) * plot_h;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg plot: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty())
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << options.title << "</text>\n";

  // Axes.
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << options.x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << kTop + plot_h / 2 << ")\">" << options.y_label
      << "</text>\n";

  // Ticks: 5 on x; decades on log y, 5 linear otherwise.
  for (int t = 0; t <= 4; ++t) {
    const double x = xmin + (xmax - xmin) * t / 4.0;
    out << "<line x1=\"" << px(x) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << px(x)
        << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(x) << "\" y=\"" << kTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(x) << "</text>\n";
  }
  if (options.log_y) {
    for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax));
         ++e) {
      const double y = kTop + (ymax - e) / (ymax - ymin) * plot_h;
      out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft
          << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
          << "</text>\n";
    }
  } else {
    for (int t = 0; t <= 4; ++t) {
      const double yy = ymin + (ymax - ymin) * t / 4.0;
      const double y = kTop + (ymax - yy) / (ymax - ymin) * plot_h;
      out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << num(yy) << "</text>\n";
    }
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[s].points) out << num(px(x)) << ',' << num(py(y)) << ' ';
    out << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly + 6 << "\" x2=\""
        << kLeft + plot_w + 32 << "\" y2=\"" << ly + 6 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kLeft + plot_w + 37 << "\" y=\"" << ly + 10
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].name
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace lgd
