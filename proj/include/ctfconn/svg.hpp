#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctfconn/tensor.hpp"

namespace ctfconn {

using Rgb = std::array<std::uint8_t, 3>;

/// 256-step colormap, piecewise linear from dark blue (13, 8, 135) through
/// magenta (204, 71, 120) to yellow (240, 249, 33).
const std::array<Rgb, 256>& heatmap_colors();

/// Colour index of v on a linear scale over [lo, hi]; 0 when lo == hi.
int color_index(double v, double lo, double hi);

/// Matrix as a grid of rects on the linear colour scale, annotated with min and max.
/// Labels, when given, name the rows and columns.
std::string svg_heatmap(const RealMatrix& m, const std::string& title, const std::vector<std::string>& labels = {});

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // NaN points are skipped
};

/// Line chart with markers; an optional dashed horizontal reference line (e.g. chance level).
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, std::optional<double> reference = {});

}  // namespace ctfconn
