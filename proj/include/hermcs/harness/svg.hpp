#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "hermcs/error.hpp"
#include "hermcs/harness/csv.hpp"

namespace hermcs::harness {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool points = false;  // draw markers instead of a polyline
  bool bars = false;
};

/// Minimal static SVG chart; enough to eyeball the experiment curves.
inline void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::vector<Series>& series, bool log_y = false) {
  constexpr double kW = 720, kH = 440, kL = 70, kR = 160, kT = 40, kB = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (log_y && !(s.y[i] > 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  if (!log_y) y0 = std::min(y0, 0.0);
  auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (ty(y) - y0) / (y1 - y0) * (kH - kT - kB); };

  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot open output file " + path.string());
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << x_label << "</text>\n"
      << "<text x=\"16\" y=\"" << kH / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << kH / 2
      << ")\" text-anchor=\"middle\">" << y_label << (log_y ? " (log10)" : "") << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << format_number(std::round(xv * 1000) / 1000) << "</text>\n";
    const double ypix = kH - kB - (yv - y0) / (y1 - y0) * (kH - kT - kB);
    out << "<text x=\"" << kL - 6 << "\" y=\"" << ypix + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_number(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % std::size(kColors)];
    if (s.bars && s.x.size() > 1) {
      const double width = std::abs(px(s.x[1]) - px(s.x[0]));
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double top = py(s.y[i]);
        out << "<rect x=\"" << px(s.x[i]) - width / 2 << "\" y=\"" << top << "\" width=\"" << width
            << "\" height=\"" << std::max(0.0, kH - kB - top) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.35\"/>\n";
      }
    } else if (s.points) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (log_y && !(s.y[i] > 0.0)) continue;
        out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
      }
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (log_y && !(s.y[i] > 0.0)) continue;
        out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      out << "\"/>\n";
    }
    out << "<text x=\"" << kW - kR + 10 << "\" y=\"" << kT + 16 * (si + 1) << "\" font-size=\"11\" fill=\"" << color
        << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hermcs::harness
