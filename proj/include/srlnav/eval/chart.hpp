#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace srlnav::eval {

enum class ChartKind { line, scatter };

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band_low;   // optional shaded band around a line (same length as x)
  std::vector<double> band_high;
  std::vector<double> color_value;  // optional per-point value in [0,1] for scatter coloring
};

struct ChartOptions {
  ChartKind kind = ChartKind::line;
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
};

namespace detail {

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Blue -> red ramp for scatter coloring.
inline std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 200 * t));
  const int g = static_cast<int>(std::lround(80 + 100 * (1 - std::abs(2 * t - 1))));
  const int b = static_cast<int>(std::lround(220 - 180 * t));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace detail

/// Renders a self-contained SVG. Output depends only on the inputs.
inline std::string render_chart(const std::vector<Series>& series, const ChartOptions& opt) {
  if (series.empty()) throw std::invalid_argument("render_chart: no series");
  detail::Range xr, yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("render_chart: series '" + s.name + "' x/y length differ");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
    for (double v : s.band_low) yr.add(v);
    for (double v : s.band_high) yr.add(v);
  }
  xr.finish();
  yr.finish();

  const double left = 70, right = 170, top = 40, bottom = 60;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };
  using detail::num;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << detail::escape(opt.title) << "</text>\n";

  os << "<g stroke=\"#333\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw) << "\" y2=\""
     << num(top + ph) << "\"/>\n";
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
     << num(top + ph) << "\"/>\n";
  os << "</g>\n<g fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0, fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    os << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
       << detail::tick(fx) << "</text>\n";
    os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">"
       << detail::tick(fy) << "</text>\n";
  }
  if (!opt.x_label.empty())
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(opt.height - 15.0)
       << "\" text-anchor=\"middle\">" << detail::escape(opt.x_label) << "</text>\n";
  if (!opt.y_label.empty())
    os << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << num(top + ph / 2) << ")\">" << detail::escape(opt.y_label) << "</text>\n";
  os << "</g>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color = detail::kPalette[si % detail::kPalette.size()];
    if (opt.kind == ChartKind::line) {
      if (!s.band_low.empty() && s.band_low.size() == s.x.size() && s.band_high.size() == s.x.size()) {
        os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << num(px(s.x[i])) << ',' << num(py(s.band_high[i])) << ' ';
        for (std::size_t i = s.x.size(); i-- > 0;) os << num(px(s.x[i])) << ',' << num(py(s.band_low[i])) << ' ';
        os << "\"/>\n";
      }
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      os << "\"/>\n";
    } else {
      os << "<g fill-opacity=\"0.8\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const std::string fill = i < s.color_value.size() ? detail::ramp(s.color_value[i]) : color;
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << fill
           << "\"/>\n";
      }
      os << "</g>\n";
    }
  }

  os << "<g class=\"legend\">\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double ly = top + 10 + 20.0 * static_cast<double>(si);
    const std::string color = detail::kPalette[si % detail::kPalette.size()];
    os << "<g class=\"legend-entry\"><rect x=\"" << num(left + pw + 15) << "\" y=\"" << num(ly - 8) << "\" width=\"12\" height=\"12\" fill=\""
       << color << "\"/><text x=\"" << num(left + pw + 32) << "\" y=\"" << num(ly + 2) << "\">"
       << detail::escape(series[si].name) << "</text></g>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

inline void emit_chart(const std::vector<Series>& series, const ChartOptions& opt, const std::filesystem::path& path) {
  const auto svg = render_chart(series, opt);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("emit_chart: cannot write " + path.string());
  f << svg;
  if (!f) throw std::runtime_error("emit_chart: write failed for " + path.string());
}

}  // namespace srlnav::eval
