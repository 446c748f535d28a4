#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfuq {

/// Static SVG plots, hand-rolled so CSV stays the canonical output and the
/// artifact carries no plotting dependency.
namespace svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                 "#9467bd", "#ff7f0e", "#17becf"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  double x0 = 80, y0 = 40, w = 520, h = 380;  // plot area in a 680x480 canvas
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool logy = false;

  double px(double x) const { return x0 + w * (x - xmin) / (xmax - xmin); }
  double py(double y) const {
    double t = logy ? (std::log10(y) - std::log10(ymin)) /
                          (std::log10(ymax) - std::log10(ymin))
                    : (y - ymin) / (ymax - ymin);
    return y0 + h * (1.0 - t);
  }
};

inline void open_canvas(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"680\" "
         "height=\"480\" viewBox=\"0 0 680 480\">\n"
      << "<rect width=\"680\" height=\"480\" fill=\"white\"/>\n"
      << "<text x=\"340\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
}

inline void draw_axes(std::ofstream& out, const Frame& f,
                      const std::string& xlabel, const std::string& ylabel) {
  out << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w
      << "\" height=\"" << f.h
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  // x ticks: 5 linear ticks
  for (int i = 0; i <= 4; ++i) {
    const double x = f.xmin + (f.xmax - f.xmin) * i / 4.0;
    const double px = f.px(x);
    out << "<line x1=\"" << px << "\" y1=\"" << f.y0 + f.h << "\" x2=\"" << px
        << "\" y2=\"" << f.y0 + f.h + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << px << "\" y=\"" << f.y0 + f.h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(x) << "</text>\n";
  }
  // y ticks: decades when log, 5 linear ticks otherwise
  if (f.logy) {
    const int d0 = static_cast<int>(std::ceil(std::log10(f.ymin) - 1e-9));
    const int d1 = static_cast<int>(std::floor(std::log10(f.ymax) + 1e-9));
    for (int d = d0; d <= d1; ++d) {
      const double py = f.py(std::pow(10.0, d));
      out << "<line x1=\"" << f.x0 - 5 << "\" y1=\"" << py << "\" x2=\"" << f.x0
          << "\" y2=\"" << py << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << f.x0 - 8 << "\" y=\"" << py + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">1e"
          << d << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double y = f.ymin + (f.ymax - f.ymin) * i / 4.0;
      const double py = f.py(y);
      out << "<line x1=\"" << f.x0 - 5 << "\" y1=\"" << py << "\" x2=\"" << f.x0
          << "\" y2=\"" << py << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << f.x0 - 8 << "\" y=\"" << py + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << num(y) << "</text>\n";
    }
  }
  out << "<text x=\"" << f.x0 + f.w / 2 << "\" y=\"470\" "
      << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << xlabel << "</text>\n"
      << "<text x=\"16\" y=\"" << f.y0 + f.h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 16 "
      << f.y0 + f.h / 2 << ")\">" << ylabel << "</text>\n";
}

}  // namespace detail

/// Line plot of one or more series; log-scale y axis optional (values must
/// then be positive; non-positive points are dropped).
inline void line_plot(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, bool logy = false) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  detail::Frame f;
  f.logy = logy;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (logy && !(s.y[i] > 0.0)) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
  if (!logy) {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }
  f.xmin = xmin; f.xmax = xmax; f.ymin = ymin; f.ymax = ymax;
  detail::open_canvas(out, title);
  detail::draw_axes(out, f, xlabel, ylabel);
  int color = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\""
        << detail::kPalette[color % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (logy && !(s.y[i] > 0.0)) continue;
      out << detail::num(f.px(s.x[i])) << ',' << detail::num(f.py(s.y[i]))
          << ' ';
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<text x=\"" << f.x0 + f.w - 6 << "\" y=\""
          << f.y0 + 16 + 16 * color << "\" text-anchor=\"end\" "
          << "font-family=\"sans-serif\" font-size=\"12\" fill=\""
          << detail::kPalette[color % 6] << "\">" << s.label << "</text>\n";
    }
    ++color;
  }
  out << "</svg>\n";
}

/// Space-time heatmap. values[i][j] is the field at (xs[j], ts[i]). The
/// color map is the fixed monotone ramp #00204c -> #ffe945 (dark blue to
/// yellow, linear in value).
inline void heatmap(const std::string& path, const std::string& title,
                    const std::vector<double>& xs, const std::vector<double>& ts,
                    const std::vector<std::vector<double>>& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  detail::Frame f;
  f.xmin = xs.front();
  f.xmax = xs.back();
  f.ymin = ts.front();
  f.ymax = ts.back();
  if (!(f.xmin < f.xmax)) f.xmax = f.xmin + 1.0;
  if (!(f.ymin < f.ymax)) f.ymax = f.ymin + 1.0;
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (const auto& rowv : values)
    for (double v : rowv) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  if (!(vmin < vmax)) vmax = vmin + 1.0;
  detail::open_canvas(out, title);
  auto color = [&](double v) {
    const double t = (v - vmin) / (vmax - vmin);
    const int r = static_cast<int>(0 + t * (255 - 0));
    const int g = static_cast<int>(32 + t * (233 - 32));
    const int b = static_cast<int>(76 + t * (69 - 76));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };
  const double cw = f.w / static_cast<double>(xs.size());
  const double ch = f.h / static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double px = f.x0 + cw * static_cast<double>(j);
      const double py = f.y0 + f.h - ch * static_cast<double>(i + 1);
      out << "<rect x=\"" << detail::num(px) << "\" y=\"" << detail::num(py)
          << "\" width=\"" << detail::num(cw + 0.5) << "\" height=\""
          << detail::num(ch + 0.5) << "\" fill=\"" << color(values[i][j])
          << "\"/>\n";
    }
  }
  detail::draw_axes(out, f, "x", "t");
  out << "</svg>\n";
}

}  // namespace svg
}  // namespace nfuq
