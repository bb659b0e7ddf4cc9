#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/engine.hpp"

namespace qwalk::svg {

struct Series {
  std::string label;
  std::string color = "#4363d8";
  bool dashed = false;
  std::vector<double> t;
  std::vector<double> y;
};

inline const char* series_color(std::size_t index) {
  static const char* palette[] = {"#4363d8", "#e6194b", "#3cb44b", "#f58231",
                                  "#911eb4", "#46f0f0", "#808000", "#000075"};
  return palette[index % (sizeof(palette) / sizeof(palette[0]))];
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// Tick label without trailing zeros (1, 3, 10, 0.5, ...).
inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string escape_text(const std::string& text) {
  std::string out;
  for (char ch : text) {
    if (ch == '&')
      out += "&amp;";
    else if (ch == '<')
      out += "&lt;";
    else if (ch == '>')
      out += "&gt;";
    else
      out += ch;
  }
  return out;
}

struct Rgb {
  double r, g, b;
};

inline std::string rgb_hex(const Rgb& c) {
  char buf[8];
  auto clamp_byte = [](double v) {
    return static_cast<int>(std::clamp(v, 0.0, 255.0));
  };
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", clamp_byte(c.r),
                clamp_byte(c.g), clamp_byte(c.b));
  return buf;
}

/// Dark-to-light ramp; input in [0, 1].
inline Rgb heat_color(double u) {
  static const Rgb stops[] = {{11, 7, 36},
                              {59, 42, 140},
                              {178, 58, 122},
                              {240, 128, 60},
                              {251, 241, 199}};
  u = std::clamp(u, 0.0, 1.0) * 4.0;
  const int i = std::min(static_cast<int>(u), 3);
  const double f = u - i;
  return {stops[i].r + f * (stops[i + 1].r - stops[i].r),
          stops[i].g + f * (stops[i + 1].g - stops[i].g),
          stops[i].b + f * (stops[i + 1].b - stops[i].b)};
}

}  // namespace detail

/// Log-log line chart of sigma-style traces. Points that cannot be drawn on
/// log axes (NaN or <= 0) break the polyline instead of distorting it.
inline void write_loglog_chart(const std::string& path,
                               const std::string& title,
                               const std::string& x_label,
                               const std::string& y_label,
                               const std::vector<Series>& series) {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool any = false;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const double x = s.t[i], y = s.y[i];
      if (!(std::isfinite(x) && x > 0.0 && std::isfinite(y) && y > 0.0))
        continue;
      if (!any) {
        x_min = x_max = x;
        y_min = y_max = y;
        any = true;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (!any) throw std::invalid_argument("no plottable points");
  if (x_max == x_min) x_max = x_min * 10.0;
  if (y_max == y_min) y_max = y_min * 10.0;

  const double lx0 = std::log10(x_min), lx1 = std::log10(x_max);
  const double ly0 = std::floor(std::log10(y_min));
  const double ly1 = std::ceil(std::log10(y_max));
  const double width = 860, height = 600;
  const double left = 70, right = width - 190, top = 50, bottom = height - 60;
  auto px = [&](double x) {
    return left + (std::log10(x) - lx0) / (lx1 - lx0) * (right - left);
  };
  auto py = [&](double y) {
    return bottom - (std::log10(y) - ly0) / (ly1 - ly0) * (bottom - top);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << (left + (right - left) / 2) << "\" y=\"28\" "
      << "font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">"
      << detail::escape_text(title) << "</text>\n";

  // Decade grid lines with 2x and 5x minors.
  out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (int e = static_cast<int>(std::floor(lx0)); e <= std::ceil(lx1); ++e)
    for (double mult : {1.0, 2.0, 5.0}) {
      const double x = mult * std::pow(10.0, e);
      if (x < x_min * 0.999 || x > x_max * 1.001) continue;
      out << "<line x1=\"" << detail::fmt(px(x)) << "\" y1=\"" << top
          << "\" x2=\"" << detail::fmt(px(x)) << "\" y2=\"" << bottom
          << "\"/>\n";
    }
  for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e)
    for (double mult : {1.0, 2.0, 5.0}) {
      const double y = mult * std::pow(10.0, e);
      if (std::log10(y) < ly0 - 1e-9 || std::log10(y) > ly1 + 1e-9) continue;
      out << "<line x1=\"" << left << "\" y1=\"" << detail::fmt(py(y))
          << "\" x2=\"" << right << "\" y2=\"" << detail::fmt(py(y))
          << "\"/>\n";
    }
  out << "</g>\n";

  // Axes and tick labels.
  out << "<g stroke=\"#000000\" stroke-width=\"1.5\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
      << "\" y2=\"" << bottom << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << bottom << "\"/>\n"
      << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int e = static_cast<int>(std::floor(lx0)); e <= std::ceil(lx1); ++e) {
    const double x = std::pow(10.0, e);
    if (x < x_min * 0.999 || x > x_max * 1.001) continue;
    out << "<text x=\"" << detail::fmt(px(x)) << "\" y=\"" << (bottom + 18)
        << "\" text-anchor=\"middle\">" << detail::tick_label(x)
        << "</text>\n";
  }
  for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e) {
    const double y = std::pow(10.0, e);
    out << "<text x=\"" << (left - 8) << "\" y=\""
        << detail::fmt(py(y) + 4) << "\" text-anchor=\"end\">"
        << detail::tick_label(y) << "</text>\n";
  }
  out << "<text x=\"" << (left + (right - left) / 2) << "\" y=\""
      << (height - 16) << "\" text-anchor=\"middle\" font-size=\"14\">"
      << detail::escape_text(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << (top + (bottom - top) / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
      << (top + (bottom - top) / 2) << ")\">" << detail::escape_text(y_label)
      << "</text>\n";
  out << "</g>\n";

  for (const Series& s : series) {
    out << "<g fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << ">\n";
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        out << "<polyline points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const double x = s.t[i], y = s.y[i];
      if (!(std::isfinite(x) && x > 0.0 && std::isfinite(y) && y > 0.0)) {
        flush();
        continue;
      }
      points += detail::fmt(px(x)) + ',' + detail::fmt(py(y)) + ' ';
    }
    flush();
    out << "</g>\n";
  }

  double legend_y = top + 10;
  out << "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  for (const Series& s : series) {
    out << "<line x1=\"" << (right + 14) << "\" y1=\"" << legend_y
        << "\" x2=\"" << (right + 44) << "\" y2=\"" << legend_y
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << (right + 50) << "\" y=\"" << (legend_y + 4)
        << "\">" << detail::escape_text(s.label) << "</text>\n";
    legend_y += 22;
  }
  out << "</g>\n</svg>\n";
}

/// Heat map of a probability grid. The support square is max-pooled down to
/// at most `max_bins` cells per side; intensity uses a square-root scale so
/// the low-probability tails stay visible next to the central peak.
inline void write_heatmap(const std::string& path, const std::string& title,
                          const ProbabilityGrid& grid, int max_bins = 128) {
  const int radius = grid.scan_radius();
  const int span = 2 * radius + 1;
  const int block = (span + max_bins - 1) / max_bins;
  const int bins = (span + block - 1) / block;

  std::vector<double> pooled(static_cast<std::size_t>(bins) * bins, 0.0);
  double peak = 0.0;
  for (int bi = 0; bi < bins; ++bi) {
    for (int bj = 0; bj < bins; ++bj) {
      double v = 0.0;
      for (int m = -radius + bi * block;
           m < std::min(-radius + (bi + 1) * block, radius + 1); ++m)
        for (int n = -radius + bj * block;
             n < std::min(-radius + (bj + 1) * block, radius + 1); ++n)
          v = std::max(v, grid.values(m, n));
      pooled[static_cast<std::size_t>(bi) * bins + bj] = v;
      peak = std::max(peak, v);
    }
  }

  const double plot = 512.0;
  const double left = 60, top = 50;
  const double width = left + plot + 40, height = top + plot + 60;
  const double cell = plot / bins;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << (left + plot / 2) << "\" y=\"28\" "
      << "font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
      << detail::escape_text(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot
      << "\" height=\"" << plot << "\" fill=\""
      << detail::rgb_hex(detail::heat_color(0.0)) << "\"/>\n";

  // n grows to the right, m grows downward with the row index.
  for (int bi = 0; bi < bins; ++bi) {
    for (int bj = 0; bj < bins; ++bj) {
      const double v = pooled[static_cast<std::size_t>(bi) * bins + bj];
      if (v <= 0.0 || peak <= 0.0) continue;
      const double u = std::sqrt(v / peak);
      if (u < 0.004) continue;  // indistinguishable from the background
      out << "<rect x=\"" << detail::fmt(left + bj * cell) << "\" y=\""
          << detail::fmt(top + bi * cell) << "\" width=\""
          << detail::fmt(cell + 0.5) << "\" height=\""
          << detail::fmt(cell + 0.5) << "\" fill=\""
          << detail::rgb_hex(detail::heat_color(u)) << "\"/>\n";
    }
  }

  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << (left - 8) << "\" y=\"" << (top + 10)
      << "\" text-anchor=\"end\">m=" << -radius << "</text>\n";
  out << "<text x=\"" << (left - 8) << "\" y=\"" << (top + plot)
      << "\" text-anchor=\"end\">m=" << radius << "</text>\n";
  out << "<text x=\"" << left << "\" y=\"" << (top + plot + 18)
      << "\">n=" << -radius << "</text>\n";
  out << "<text x=\"" << (left + plot) << "\" y=\"" << (top + plot + 18)
      << "\" text-anchor=\"end\">n=" << radius << "</text>\n";
  out << "</g>\n</svg>\n";
}

}  // namespace qwalk::svg
