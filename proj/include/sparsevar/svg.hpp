#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sparsevar/analysis.hpp"
#include "sparsevar/types.hpp"

namespace sparsevar {

namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace detail

/// Grayscale heatmap of coefficient magnitudes (darker = larger), with lag
/// block separators.  Layout mirrors [Phi(1) .. Phi(p) | beta(1) .. beta(s)].
inline void write_sparsity_svg(const std::string& path, const Matrix& coef, int k, int p, int m,
                               int s) {
  const int rows = static_cast<int>(coef.rows());
  const int cols = static_cast<int>(coef.cols());
  const double cell = 18.0, margin = 10.0;
  const double w = margin * 2 + cell * cols, h = margin * 2 + cell * rows;
  const double vmax = std::max(coef.cwiseAbs().maxCoeff(), 1e-300);
  std::ofstream out(path);
  if (!out) fail_data("io", "cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_num(w)
      << "\" height=\"" << detail::svg_num(h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double mag = std::abs(coef(i, j)) / vmax;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - mag)));
      out << "<rect x=\"" << detail::svg_num(margin + j * cell) << "\" y=\""
          << detail::svg_num(margin + i * cell) << "\" width=\"" << detail::svg_num(cell)
          << "\" height=\"" << detail::svg_num(cell) << "\" fill=\"rgb(" << shade << "," << shade
          << "," << shade << ")\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    }
  // separators between lag blocks and before the exogenous block
  for (int ell = 1; ell <= p + (m > 0 ? s : 0); ++ell) {
    const int col = ell <= p ? ell * k : k * p + (ell - p) * m;
    if (col >= cols) break;
    out << "<line x1=\"" << detail::svg_num(margin + col * cell) << "\" y1=\""
        << detail::svg_num(margin) << "\" x2=\"" << detail::svg_num(margin + col * cell)
        << "\" y2=\"" << detail::svg_num(margin + rows * cell)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  out << "</svg>\n";
}

/// MSFE against the penalty grid index with one-standard-error whiskers and
/// the selected point highlighted.
inline void write_lambda_curve_svg(const std::string& path,
                                   const std::vector<LambdaCurvePoint>& curve, int optimal_index) {
  const double w = 480.0, h = 320.0, ml = 50.0, mr = 15.0, mt = 15.0, mb = 35.0;
  std::ofstream out(path);
  if (!out) fail_data("io", "cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_num(w)
      << "\" height=\"" << detail::svg_num(h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!curve.empty()) {
    double lo = curve.front().msfe - curve.front().se, hi = curve.front().msfe + curve.front().se;
    for (const auto& pt : curve) {
      lo = std::min(lo, pt.msfe - pt.se);
      hi = std::max(hi, pt.msfe + pt.se);
    }
    if (hi <= lo) hi = lo + 1.0;
    const int n = static_cast<int>(curve.size());
    auto xpos = [&](int i) {
      return n == 1 ? ml + 0.5 * (w - ml - mr)
                    : ml + (w - ml - mr) * static_cast<double>(i) / (n - 1);
    };
    auto ypos = [&](double v) { return mt + (h - mt - mb) * (hi - v) / (hi - lo); };
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i < n; ++i) out << detail::svg_num(xpos(i)) << ',' << detail::svg_num(ypos(curve[i].msfe)) << ' ';
    out << "\"/>\n";
    for (int i = 0; i < n; ++i) {
      out << "<line x1=\"" << detail::svg_num(xpos(i)) << "\" y1=\""
          << detail::svg_num(ypos(curve[i].msfe - curve[i].se)) << "\" x2=\""
          << detail::svg_num(xpos(i)) << "\" y2=\""
          << detail::svg_num(ypos(curve[i].msfe + curve[i].se))
          << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
      const bool sel = i == optimal_index;
      out << "<circle cx=\"" << detail::svg_num(xpos(i)) << "\" cy=\""
          << detail::svg_num(ypos(curve[i].msfe)) << "\" r=\"" << (sel ? 5 : 3) << "\" fill=\""
          << (sel ? "crimson" : "steelblue") << "\"/>\n";
    }
    out << "<text x=\"" << detail::svg_num(w / 2) << "\" y=\"" << detail::svg_num(h - 8)
        << "\" text-anchor=\"middle\" font-size=\"12\">penalty grid index (largest lambda first)"
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace sparsevar
