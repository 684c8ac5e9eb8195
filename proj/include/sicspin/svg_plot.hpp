#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sicspin/errors.hpp"

namespace sicspin {

// Minimal standalone SVG plots: axes with ticks, circle markers for data,
// polylines for fitted curves. No raster output, no plotting dependency.

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  std::string color = "#1f77b4";
  bool line = true;  // false: markers only
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double mult = 10.0;
  if (frac <= 1.5) mult = 1.0;
  else if (frac <= 3.0) mult = 2.0;
  else if (frac <= 7.0) mult = 5.0;
  return mult * mag;
}

}  // namespace detail

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const std::vector<PlotSeries>& series) {
  if (series.empty()) throw ValidationError("svg plot: no series");
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ValidationError("svg plot: series length mismatch");
    for (double v : s.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : s.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!(x_min <= x_max) || !(y_min <= y_max)) throw ValidationError("svg plot: empty series");
  if (x_max == x_min) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  if (y_max == y_min) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double x_pad = 0.04 * (x_max - x_min), y_pad = 0.06 * (y_max - y_min);
  x_min -= x_pad;
  x_max += x_pad;
  y_min -= y_pad;
  y_max += y_pad;

  const double width = 720, height = 480;
  const double ml = 80, mr = 24, mt = 42, mb = 56;
  const auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
  const auto py = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << title << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";

  const double xs = detail::nice_step(x_max - x_min);
  for (double t = std::ceil(x_min / xs) * xs; t <= x_max + 1e-9 * xs; t += xs) {
    if (std::abs(t) < 1e-9 * xs) t = 0.0;
    const double gx = px(t);
    out << "<line x1=\"" << detail::svg_num(gx) << "\" y1=\"" << height - mb << "\" x2=\""
        << detail::svg_num(gx) << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << detail::svg_num(gx) << "\" y=\"" << height - mb + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::tick_label(t) << "</text>\n";
  }
  const double ys = detail::nice_step(y_max - y_min);
  for (double t = std::ceil(y_min / ys) * ys; t <= y_max + 1e-9 * ys; t += ys) {
    if (std::abs(t) < 1e-9 * ys) t = 0.0;
    const double gy = py(t);
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << detail::svg_num(gy) << "\" x2=\"" << ml
        << "\" y2=\"" << detail::svg_num(gy) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << detail::svg_num(gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::tick_label(t) << "</text>\n";
  }
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (mt + height - mb) / 2 << ")\">" << y_label << "</text>\n";

  double legend_y = mt + 14;
  for (const auto& s : series) {
    if (s.line) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << detail::svg_num(px(s.x[i])) << "," << detail::svg_num(py(s.y[i])) << " ";
      out << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << detail::svg_num(px(s.x[i])) << "\" cy=\""
            << detail::svg_num(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
    if (!s.label.empty()) {
      out << "<rect x=\"" << width - mr - 150 << "\" y=\"" << legend_y - 8
          << "\" width=\"14\" height=\"4\" fill=\"" << s.color << "\"/>\n";
      out << "<text x=\"" << width - mr - 130 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
      legend_y += 16;
    }
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace sicspin
