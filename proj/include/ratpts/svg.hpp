#pragma once

// Minimal log-log scatter plot writer.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace ratpts {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool has_fit = false;
  double slope = 0.0;
  double intercept = 0.0;  // natural-log intercept
};

inline void write_loglog_svg(std::ostream& os, const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, Bm = 60;
  static const char* const colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (auto [x, y] : s.points)
      if (x > 0 && y > 0) {
        x0 = std::min(x0, std::log10(x));
        x1 = std::max(x1, std::log10(x));
        y0 = std::min(y0, std::log10(y));
        y1 = std::max(y1, std::log10(y));
      }
  if (!(x0 < x1)) x0 -= 0.5, x1 += 0.5;
  if (!(y0 < y1)) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double ly) { return H - Bm - (ly - y0) / (y1 - y0) * (H - T - Bm); };
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">", W / 2);
  os << buf << title << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                L, T, W - L - R, H - T - Bm);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">", (L + W - R) / 2, H - 15);
  os << buf << "log10 " << x_label << "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"15\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 15 %g)\">",
                (T + H - Bm) / 2, (T + H - Bm) / 2);
  os << buf << "log10 " << y_label << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double lx = x0 + (x1 - x0) * k / 4, ly = y0 + (y1 - y0) * k / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.2f</text>\n", px(lx), H - Bm + 16,
                  lx);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.2f</text>\n", L - 6, py(ly) + 4, ly);
    os << buf;
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = colours[i % 6];
    for (auto [x, y] : s.points) {
      if (!(x > 0 && y > 0)) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"%s\"/>\n", px(std::log10(x)),
                    py(std::log10(y)), colour);
      os << buf;
    }
    if (s.has_fit) {
      // ln y = slope ln x + intercept, so log10 y = slope log10 x + intercept / ln 10.
      auto fy = [&](double lx) { return s.slope * lx + s.intercept / std::log(10.0); };
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"%s\" stroke-dasharray=\"4 3\"/>\n",
                    px(x0), py(fy(x0)), px(x1), py(fy(x1)), colour);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">", L + 10, T + 16 + 16.0 * i, colour);
    os << buf << s.label;
    if (s.has_fit) {
      std::snprintf(buf, sizeof buf, " (slope %.3f)", s.slope);
      os << buf;
    }
    os << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace ratpts
