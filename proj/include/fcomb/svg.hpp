#pragma once
// Static SVG line plots. Pure function of the input series: fixed canvas,
// fixed palette, fixed-precision coordinates, so identical data renders to
// identical bytes regardless of thread count or run order.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <fcomb/errors.hpp>

namespace fcomb {

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

inline std::string svg_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return std::string(buf);
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Line plot with axes, ticks, title and a legend when labels are present.
inline std::string render_line_plot(const std::string& title,
                                    const std::string& x_label,
                                    const std::string& y_label,
                                    const std::vector<SvgSeries>& series) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#7f7f7f", "#9467bd", "#8c564b"};
  constexpr int kColors = 6;
  constexpr double W = 720, H = 480;
  constexpr double ML = 72, MR = 24, MT = 44, MB = 56;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool seen = false;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw invalid_input("plot series x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!seen) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        seen = true;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  }
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    if (span > 0) {
      lo -= 0.05 * span;
      hi += 0.05 * span;
    } else {
      const double d = std::max(1.0, std::abs(lo)) * 0.05;
      lo -= d;
      hi += d;
    }
  };
  pad(xmin, xmax);
  pad(ymin, ymax);

  auto px = [&](double x) {
    return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
  };
  auto py = [&](double y) {
    return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
     << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H
     << "\" fill=\"#ffffff\"/>\n";
  os << "<rect x=\"" << detail::svg_num(ML) << "\" y=\"" << detail::svg_num(MT)
     << "\" width=\"" << detail::svg_num(W - ML - MR) << "\" height=\""
     << detail::svg_num(H - MT - MB)
     << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  // Five ticks per axis at even fractions of the padded range.
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const double tx = px(fx), ty = py(fy);
    os << "<line x1=\"" << detail::svg_num(tx) << "\" y1=\""
       << detail::svg_num(H - MB) << "\" x2=\"" << detail::svg_num(tx)
       << "\" y2=\"" << detail::svg_num(H - MB + 5)
       << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << detail::svg_num(tx) << "\" y=\""
       << detail::svg_num(H - MB + 18)
       << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">"
       << detail::svg_tick(fx) << "</text>\n";
    os << "<line x1=\"" << detail::svg_num(ML - 5) << "\" y1=\""
       << detail::svg_num(ty) << "\" x2=\"" << detail::svg_num(ML)
       << "\" y2=\"" << detail::svg_num(ty) << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << detail::svg_num(ML - 8) << "\" y=\""
       << detail::svg_num(ty + 4)
       << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">"
       << detail::svg_tick(fy) << "</text>\n";
  }

  os << "<text x=\"" << detail::svg_num(W / 2) << "\" y=\"24\" "
     << "font-size=\"15\" text-anchor=\"middle\" fill=\"#111111\">"
     << detail::svg_escape(title) << "</text>\n";
  os << "<text x=\"" << detail::svg_num((ML + W - MR) / 2) << "\" y=\""
     << detail::svg_num(H - 14)
     << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">"
     << detail::svg_escape(x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << detail::svg_num((MT + H - MB) / 2)
     << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\" "
     << "transform=\"rotate(-90 18 " << detail::svg_num((MT + H - MB) / 2)
     << ")\">" << detail::svg_escape(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const SvgSeries& sr = series[s];
    const char* color = kPalette[s % kColors];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.6\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
      if (!first) os << ' ';
      os << detail::svg_num(px(sr.x[i])) << ',' << detail::svg_num(py(sr.y[i]));
      first = false;
    }
    os << "\"/>\n";
  }

  double ly = MT + 16;
  for (std::size_t s = 0; s < series.size(); ++s) {
    if (series[s].label.empty()) continue;
    const char* color = kPalette[s % kColors];
    os << "<line x1=\"" << detail::svg_num(W - MR - 130) << "\" y1=\""
       << detail::svg_num(ly - 4) << "\" x2=\"" << detail::svg_num(W - MR - 106)
       << "\" y2=\"" << detail::svg_num(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << detail::svg_num(W - MR - 100) << "\" y=\""
       << detail::svg_num(ly)
       << "\" font-size=\"12\" fill=\"#333333\">"
       << detail::svg_escape(series[s].label) << "</text>\n";
    ly += 18;
  }

  os << "</svg>\n";
  return os.str();
}

}  // namespace fcomb
