#pragma once

// Plot descriptions rendered to self-contained SVG. A PlotSpec round-trips
// through a companion CSV, and rendering is a pure function of the spec, so
// re-rendering from the CSV reproduces the SVG byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fdxai/error.hpp"
#include "fdxai/io.hpp"

namespace fdxai {

enum class PlotKind { Eigenfunction, MeanPmEigenfunction, ExtremeBundles, ScoreScatter, CorrelationHeatmap, GroupMeans };

enum class SeriesStyle { Line, Dashed, Thin, Points };

inline const char* to_string(PlotKind k) {
  switch (k) {
    case PlotKind::Eigenfunction: return "eigenfunction";
    case PlotKind::MeanPmEigenfunction: return "mean-pm-eigenfunction";
    case PlotKind::ExtremeBundles: return "extreme-bundles";
    case PlotKind::ScoreScatter: return "score-scatter";
    case PlotKind::CorrelationHeatmap: return "correlation-heatmap";
    case PlotKind::GroupMeans: return "group-means";
  }
  return "?";
}

inline const char* to_string(SeriesStyle s) {
  switch (s) {
    case SeriesStyle::Line: return "line";
    case SeriesStyle::Dashed: return "dashed";
    case SeriesStyle::Thin: return "thin";
    case SeriesStyle::Points: return "points";
  }
  return "?";
}

inline PlotKind plot_kind_from_string(const std::string& s) {
  for (auto k : {PlotKind::Eigenfunction, PlotKind::MeanPmEigenfunction, PlotKind::ExtremeBundles,
                 PlotKind::ScoreScatter, PlotKind::CorrelationHeatmap, PlotKind::GroupMeans})
    if (s == to_string(k)) return k;
  throw IoError("unknown plot kind '" + s + "'");
}

inline SeriesStyle series_style_from_string(const std::string& s) {
  for (auto k : {SeriesStyle::Line, SeriesStyle::Dashed, SeriesStyle::Thin, SeriesStyle::Points})
    if (s == to_string(k)) return k;
  throw IoError("unknown series style '" + s + "'");
}

/// One y vector over the shared x vector. NaN marks a missing value (a gap in
/// a line, an absent point, or an undefined heatmap cell).
struct Series {
  std::string name;
  std::vector<double> y;
  SeriesStyle style = SeriesStyle::Line;
  std::string color = "#1f77b4";
  bool in_legend = true;
};

struct PlotSpec {
  PlotKind kind = PlotKind::Eigenfunction;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool zero_line = false;
  std::vector<double> x;
  std::vector<Series> series;  // for heatmaps: one series per matrix row

  void validate() const {
    auto plain = [](const std::string& text) { return text.find_first_of(",\n\r") == std::string::npos; };
    detail::require(plain(title) && plain(x_label) && plain(y_label), "plot text must not contain commas or newlines");
    detail::require(!series.empty(), "plot '" + title + "' has no series");
    for (double v : x) detail::require(std::isfinite(v), "plot '" + title + "': non-finite x value");
    for (const auto& s : series) {
      detail::require(plain(s.name) && plain(s.color), "series names must not contain commas or newlines");
      detail::require(s.y.size() == x.size(), "plot '" + title + "': series '" + s.name + "' length differs from x");
      for (double v : s.y)
        detail::require(std::isfinite(v) || std::isnan(v), "plot '" + title + "': infinite value in '" + s.name + "'");
    }
  }
};

namespace detail {

inline std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double v, int decimals = 2) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", decimals, v);
  std::string s = buffer;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);  // "-0.00"
  return s;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

/// Data range with 5% padding on each side.
inline Range padded_range(double lo, double hi) {
  if (!(lo <= hi)) return {0.0, 1.0};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

inline int tick_decimals(const Range& r) {
  const double span = r.hi - r.lo;
  const int d = 2 - static_cast<int>(std::floor(std::log10(span)));
  return std::clamp(d, 0, 8);
}

/// Diverging blue-white-red map for values in [-1, 1].
inline std::string diverging_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  int r, g, b;
  if (v >= 0.0) {
    r = 255;
    g = static_cast<int>(std::lround(255.0 * (1.0 - v)));
    b = g;
  } else {
    b = 255;
    r = static_cast<int>(std::lround(255.0 * (1.0 + v)));
    g = r;
  }
  char buffer[8];
  std::snprintf(buffer, sizeof buffer, "#%02x%02x%02x", r, g, b);
  return buffer;
}

}  // namespace detail

inline constexpr int kSvgWidth = 720;
inline constexpr int kSvgHeight = 480;

inline std::string render_svg(const PlotSpec& spec) {
  using detail::fixed;
  using detail::xml_escape;
  spec.validate();
  const double left = 80, right = 170, top = 40, bottom = 60;
  const double plot_w = kSvgWidth - left - right;
  const double plot_h = kSvgHeight - top - bottom;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
      << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight << "\" fill=\"#ffffff\"/>\n"
      << "<text x=\"" << fixed(kSvgWidth / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(spec.title) << "</text>\n";

  if (spec.kind == PlotKind::CorrelationHeatmap) {
    const auto k = spec.series.size();
    const double cell = std::min(plot_w, plot_h) / static_cast<double>(std::max<std::size_t>(k, 1));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < spec.x.size(); ++c) {
        const double v = spec.series[r].y[c];
        const std::string color = std::isnan(v) ? "#bdbdbd" : detail::diverging_color(v);
        svg << "<rect x=\"" << fixed(left + cell * static_cast<double>(c)) << "\" y=\""
            << fixed(top + cell * static_cast<double>(r)) << "\" width=\"" << fixed(cell) << "\" height=\"" << fixed(cell)
            << "\" fill=\"" << color << "\"/>\n";
      }
    const double legend_x = left + cell * static_cast<double>(spec.x.size()) + 20;
    for (int i = 0; i <= 10; ++i) {
      const double v = 1.0 - 0.2 * i;
      svg << "<rect x=\"" << fixed(legend_x) << "\" y=\"" << fixed(top + 18.0 * i) << "\" width=\"16\" height=\"18\" fill=\""
          << detail::diverging_color(v) << "\"/>\n"
          << "<text x=\"" << fixed(legend_x + 22) << "\" y=\"" << fixed(top + 18.0 * i + 13) << "\">" << fixed(v, 1)
          << "</text>\n";
    }
    svg << "<rect x=\"" << fixed(legend_x) << "\" y=\"" << fixed(top + 18.0 * 11 + 6)
        << "\" width=\"16\" height=\"18\" fill=\"#bdbdbd\"/>\n"
        << "<text x=\"" << fixed(legend_x + 22) << "\" y=\"" << fixed(top + 18.0 * 11 + 19) << "\">undefined</text>\n";
    const std::size_t label_every = std::max<std::size_t>(1, k / 8);
    for (std::size_t c = 0; c < spec.x.size(); c += label_every) {
      const double cx = left + cell * (static_cast<double>(c) + 0.5);
      const double cy = top + cell * (static_cast<double>(c) + 0.5);
      svg << "<text x=\"" << fixed(cx) << "\" y=\"" << fixed(top + cell * static_cast<double>(k) + 16)
          << "\" text-anchor=\"middle\" font-size=\"10\">" << fixed(spec.x[c], 2) << "</text>\n"
          << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(cy + 3)
          << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(spec.x[c], 2) << "</text>\n";
    }
    svg << "<text x=\"" << fixed(left + cell * static_cast<double>(k) / 2) << "\" y=\"" << fixed(kSvgHeight - 12.0)
        << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
  }

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (std::size_t i = 0; i < spec.x.size(); ++i)
    for (const auto& s : spec.series)
      if (!std::isnan(s.y[i])) {
        x_lo = std::min(x_lo, spec.x[i]);
        x_hi = std::max(x_hi, spec.x[i]);
        y_lo = std::min(y_lo, s.y[i]);
        y_hi = std::max(y_hi, s.y[i]);
      }
  if (spec.zero_line) {
    y_lo = std::min(y_lo, 0.0);
    y_hi = std::max(y_hi, 0.0);
  }
  const auto xr = detail::padded_range(x_lo, x_hi);
  const auto yr = detail::padded_range(y_lo, y_hi);
  auto px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double v) { return top + (yr.hi - v) / (yr.hi - yr.lo) * plot_h; };

  svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(plot_w) << "\" height=\""
      << fixed(plot_h) << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  const int xd = detail::tick_decimals(xr), yd = detail::tick_decimals(yr);
  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    svg << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << fixed(top + plot_h) << "\" x2=\"" << fixed(px(xv))
        << "\" y2=\"" << fixed(top + plot_h + 5) << "\" stroke=\"#000000\"/>\n"
        << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(top + plot_h + 18) << "\" text-anchor=\"middle\">"
        << fixed(xv, xd) << "</text>\n"
        << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << fixed(left) << "\" y2=\""
        << fixed(py(yv)) << "\" stroke=\"#000000\"/>\n"
        << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
        << fixed(yv, yd) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"" << fixed(kSvgHeight - 14.0)
      << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << fixed(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fixed(top + plot_h / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n";
  if (spec.zero_line)
    svg << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(py(0.0)) << "\" x2=\"" << fixed(left + plot_w)
        << "\" y2=\"" << fixed(py(0.0)) << "\" stroke=\"#7f7f7f\" stroke-dasharray=\"2,3\"/>\n";

  for (const auto& s : spec.series) {
    if (s.style == SeriesStyle::Points) {
      svg << "<g fill=\"" << s.color << "\" fill-opacity=\"0.6\">\n";
      for (std::size_t i = 0; i < spec.x.size(); ++i)
        if (!std::isnan(s.y[i]))
          svg << "<circle cx=\"" << fixed(px(spec.x[i])) << "\" cy=\"" << fixed(py(s.y[i])) << "\" r=\"2.5\"/>\n";
      svg << "</g>\n";
      continue;
    }
    std::string stroke_attr = "stroke=\"" + s.color + "\" fill=\"none\"";
    if (s.style == SeriesStyle::Line) stroke_attr += " stroke-width=\"2\"";
    if (s.style == SeriesStyle::Dashed) stroke_attr += " stroke-width=\"1.5\" stroke-dasharray=\"6,4\"";
    if (s.style == SeriesStyle::Thin) stroke_attr += " stroke-width=\"0.6\" stroke-opacity=\"0.5\"";
    std::string points;
    auto flush = [&] {
      if (!points.empty()) svg << "<polyline " << stroke_attr << " points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < spec.x.size(); ++i) {
      if (std::isnan(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fixed(px(spec.x[i])) + "," + fixed(py(s.y[i]));
    }
    flush();
  }

  double legend_y = top + 10;
  for (const auto& s : spec.series) {
    if (!s.in_legend) continue;
    const double lx = left + plot_w + 12;
    if (s.style == SeriesStyle::Points)
      svg << "<circle cx=\"" << fixed(lx + 10) << "\" cy=\"" << fixed(legend_y - 4) << "\" r=\"4\" fill=\"" << s.color
          << "\"/>\n";
    else
      svg << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(legend_y - 4) << "\" x2=\"" << fixed(lx + 20)
          << "\" y2=\"" << fixed(legend_y - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
          << (s.style == SeriesStyle::Dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    svg << "<text x=\"" << fixed(lx + 26) << "\" y=\"" << fixed(legend_y) << "\">" << xml_escape(s.name)
        << "</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Companion CSV: '#'-prefixed metadata lines, then a header row "x,<names>"
// and one row per x value. Missing values are written as NA.

inline std::string plot_to_csv(const PlotSpec& spec) {
  spec.validate();
  std::ostringstream out;
  out << "# fdxai-plot,1\n"
      << "# kind," << to_string(spec.kind) << '\n'
      << "# title," << spec.title << '\n'
      << "# x_label," << spec.x_label << '\n'
      << "# y_label," << spec.y_label << '\n'
      << "# zero_line," << (spec.zero_line ? 1 : 0) << '\n';
  out << "# style";
  for (const auto& s : spec.series) out << ',' << to_string(s.style);
  out << "\n# color";
  for (const auto& s : spec.series) out << ',' << s.color;
  out << "\n# legend";
  for (const auto& s : spec.series) out << ',' << (s.in_legend ? 1 : 0);
  out << "\nx";
  for (const auto& s : spec.series) out << ',' << s.name;
  out << '\n';
  for (std::size_t i = 0; i < spec.x.size(); ++i) {
    out << format_double(spec.x[i]);
    for (const auto& s : spec.series) out << ',' << (std::isnan(s.y[i]) ? std::string("NA") : format_double(s.y[i]));
    out << '\n';
  }
  return out.str();
}

inline PlotSpec plot_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  PlotSpec spec;
  std::vector<std::string> styles, colors, legends;
  auto rest = [](const std::string& l) {
    std::vector<std::string> out;
    for (auto f : split_fields(l)) out.emplace_back(f);
    out.erase(out.begin());
    return out;
  };
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto fields = rest(line.substr(2));
      const std::string key = line.substr(2, line.find(',') - 2);
      const std::string value = line.find(',') == std::string::npos ? "" : line.substr(line.find(',') + 1);
      if (key == "kind") spec.kind = plot_kind_from_string(value);
      else if (key == "title") spec.title = value;
      else if (key == "x_label") spec.x_label = value;
      else if (key == "y_label") spec.y_label = value;
      else if (key == "zero_line") spec.zero_line = value == "1";
      else if (key == "style") styles = fields;
      else if (key == "color") colors = fields;
      else if (key == "legend") legends = fields;
      continue;
    }
    if (!header_seen) {
      const auto names = rest(line);
      if (names.size() != styles.size() || names.size() != colors.size() || names.size() != legends.size())
        throw IoError("plot csv: series metadata does not match header");
      for (std::size_t k = 0; k < names.size(); ++k)
        spec.series.push_back({names[k], {}, series_style_from_string(styles[k]), colors[k], legends[k] == "1"});
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != spec.series.size() + 1) throw IoError("plot csv: ragged row");
    spec.x.push_back(parse_double(fields[0]));
    for (std::size_t k = 0; k < spec.series.size(); ++k)
      spec.series[k].y.push_back(fields[k + 1] == "NA" ? std::numeric_limits<double>::quiet_NaN()
                                                       : parse_double(fields[k + 1]));
  }
  if (!header_seen) throw IoError("plot csv: missing header");
  return spec;
}

/// Writes <dir>/<name>.svg and <dir>/<name>.csv; returns the two paths.
inline std::pair<std::filesystem::path, std::filesystem::path> write_plot(const PlotSpec& spec,
                                                                          const std::filesystem::path& dir,
                                                                          const std::string& name) {
  const auto svg_path = dir / (name + ".svg");
  const auto csv_path = dir / (name + ".csv");
  write_text(svg_path, render_svg(spec));
  write_text(csv_path, plot_to_csv(spec));
  return {svg_path, csv_path};
}

}  // namespace fdxai
