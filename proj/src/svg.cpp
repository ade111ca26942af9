#include "ctfconn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ctfconn/errors.hpp"

namespace ctfconn {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) + "\" height=\"" + px(h) + "\" viewBox=\"0 0 " +
         px(w) + " " + px(h) + "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, int size, const char* anchor = "start",
                 const std::string& extra = "") {
  return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" + std::to_string(size) + "\" text-anchor=\"" +
         anchor + "\"" + extra + ">" + escape(s) + "</text>\n";
}

const std::array<Rgb, 8> kSeriesColors{{{31, 119, 180},
                                        {214, 39, 40},
                                        {44, 160, 44},
                                        {148, 103, 189},
                                        {255, 127, 14},
                                        {140, 86, 75},
                                        {227, 119, 194},
                                        {127, 127, 127}}};

}  // namespace

const std::array<Rgb, 256>& heatmap_colors() {
  static const std::array<Rgb, 256> colors = [] {
    constexpr std::array<std::array<double, 3>, 3> anchors{{{13, 8, 135}, {204, 71, 120}, {240, 249, 33}}};
    std::array<Rgb, 256> out{};
    for (int i = 0; i < 256; ++i) {
      const double t = i / 255.0 * 2.0;
      const int seg = std::min(1, static_cast<int>(t));
      const double u = t - seg;
      for (int c = 0; c < 3; ++c) {
        const double v = anchors[seg][c] + u * (anchors[seg + 1][c] - anchors[seg][c]);
        out[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
    return out;
  }();
  return colors;
}

int color_index(double v, double lo, double hi) {
  if (!(hi > lo)) return 0;
  const double t = (v - lo) / (hi - lo);
  return std::clamp(static_cast<int>(std::lround(t * 255.0)), 0, 255);
}

std::string svg_heatmap(const RealMatrix& m, const std::string& title, const std::vector<std::string>& labels) {
  if (m.size() == 0) throw InvalidInput("cannot draw an empty matrix");
  if (!m.allFinite()) throw InvalidInput("heatmap values must be finite");
  if (!labels.empty() && (static_cast<Index>(labels.size()) != m.rows() || m.rows() != m.cols())) {
    throw InvalidInput("heatmap labels need a square matrix with one label per row");
  }
  const double lo = m.minCoeff(), hi = m.maxCoeff();
  const double cell = std::clamp(480.0 / static_cast<double>(std::max(m.rows(), m.cols())), 2.0, 40.0);
  const double left = labels.empty() ? 20.0 : 90.0, top = 40.0;
  const double width = left + cell * static_cast<double>(m.cols()) + 80.0;
  const double height = top + cell * static_cast<double>(m.rows()) + (labels.empty() ? 40.0 : 100.0);

  std::string out = header(width, height);
  out += text(left, 24.0, title, 16);
  const auto& colors = heatmap_colors();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      out += "<rect x=\"" + px(left + cell * static_cast<double>(j)) + "\" y=\"" + px(top + cell * static_cast<double>(i)) +
             "\" width=\"" + px(cell) + "\" height=\"" + px(cell) + "\" fill=\"" +
             hex(colors[static_cast<std::size_t>(color_index(m(i, j), lo, hi))]) + "\"/>\n";
    }
  }
  if (!labels.empty()) {
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const double c = static_cast<double>(k) * cell + cell / 2.0;
      out += text(left - 6.0, top + c + 4.0, labels[k], 11, "end");
      const double x = left + c, y = top + cell * static_cast<double>(m.rows()) + 10.0;
      out += text(x, y, labels[k], 11, "end", " transform=\"rotate(-60 " + px(x) + " " + px(y) + ")\"");
    }
  }
  // Colour bar with min / max annotations.
  const double bar_x = left + cell * static_cast<double>(m.cols()) + 20.0;
  const double bar_h = cell * static_cast<double>(m.rows());
  for (int k = 0; k < 64; ++k) {
    const int idx = 255 - k * 255 / 63;
    out += "<rect x=\"" + px(bar_x) + "\" y=\"" + px(top + bar_h * k / 64.0) + "\" width=\"14\" height=\"" +
           px(bar_h / 64.0 + 0.5) + "\" fill=\"" + hex(colors[static_cast<std::size_t>(idx)]) + "\"/>\n";
  }
  out += text(bar_x, top - 6.0, "max " + num(hi), 11);
  out += text(bar_x, top + bar_h + 14.0, "min " + num(lo), 11);
  out += "</svg>\n";
  return out;
}

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, std::optional<double> reference) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InvalidInput("series '" + s.name + "' has mismatched x and y");
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k]) || !std::isfinite(s.x[k])) continue;
      x_lo = std::min(x_lo, s.x[k]);
      x_hi = std::max(x_hi, s.x[k]);
      y_lo = std::min(y_lo, s.y[k]);
      y_hi = std::max(y_hi, s.y[k]);
    }
  }
  if (reference) {
    y_lo = std::min(y_lo, *reference);
    y_hi = std::max(y_hi, *reference);
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  if (x_hi == x_lo) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  constexpr double w = 560.0, h = 400.0, left = 70.0, right = 150.0, top = 40.0, bottom = 60.0;
  const double pw = w - left - right, ph = h - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::string out = header(w, h);
  out += text(left, 24.0, title, 16);
  out += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(pw) + "\" height=\"" + px(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 4.0, yv = y_lo + (y_hi - y_lo) * k / 4.0;
    out += text(sx(xv), top + ph + 16.0, num(xv), 11, "middle");
    out += text(left - 6.0, sy(yv) + 4.0, num(yv), 11, "end");
  }
  out += text(left + pw / 2.0, h - 16.0, x_label, 13, "middle");
  out += text(18.0, top + ph / 2.0, y_label, 13, "middle",
              " transform=\"rotate(-90 18.00 " + px(top + ph / 2.0) + ")\"");
  if (reference) {
    out += "<line x1=\"" + px(left) + "\" y1=\"" + px(sy(*reference)) + "\" x2=\"" + px(left + pw) + "\" y2=\"" +
           px(sy(*reference)) + "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const std::string color = hex(kSeriesColors[s % kSeriesColors.size()]);
    std::string points;
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      if (!std::isfinite(series[s].y[k])) continue;
      points += px(sx(series[s].x[k])) + "," + px(sy(series[s].y[k])) + " ";
      out += "<circle cx=\"" + px(sx(series[s].x[k])) + "\" cy=\"" + px(sy(series[s].y[k])) + "\" r=\"3\" fill=\"" +
             color + "\"/>\n";
    }
    if (!points.empty()) {
      points.pop_back();
      out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    }
    const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
    out += "<line x1=\"" + px(left + pw + 12.0) + "\" y1=\"" + px(ly - 4.0) + "\" x2=\"" + px(left + pw + 32.0) +
           "\" y2=\"" + px(ly - 4.0) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += text(left + pw + 36.0, ly, series[s].name, 11);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ctfconn
