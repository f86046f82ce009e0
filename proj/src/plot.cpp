#include "aomlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "aomlab/csv.hpp"
#include "aomlab/error.hpp"

namespace aomlab {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr double kMarginLeft = 78, kMarginRight = 24, kMarginTop = 58, kMarginBottom = 52;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
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

std::vector<std::size_t> thin(std::size_t n, std::size_t max_points) {
  std::vector<std::size_t> idx;
  if (n <= max_points || max_points < 2) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t i = 0; i < max_points; ++i) {
    idx.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(n - 1) /
                     static_cast<double>(max_points - 1))));
  }
  return idx;
}

// A series after thinning and the y transform; NaN marks a gap.
struct Prepared {
  std::vector<double> x, y, lo, hi;
  bool band = false;
};

Prepared prepare(const PlotSeries& s, const PlotSpec& spec) {
  if (s.x.empty() || s.mean.empty()) {
    fail(ErrorCode::invalid_argument, "plot: series '" + s.label + "' is empty");
  }
  if (s.x.size() != s.mean.size() || (!s.std.empty() && s.std.size() != s.mean.size())) {
    fail(ErrorCode::invalid_argument, "plot: series '" + s.label + "' has mismatched lengths");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto ty = [&](double y) {
    if (!std::isfinite(y)) return nan;
    if (!spec.log_y) return y;
    if (y <= 0.0) {
      fail(ErrorCode::invalid_argument,
           "plot: series '" + s.label + "' has a non-positive value on a log axis");
    }
    return std::log(y);
  };
  Prepared p;
  p.band = !s.std.empty();
  for (std::size_t i : thin(s.x.size(), spec.max_points)) {
    p.x.push_back(s.x[i]);
    p.y.push_back(ty(s.mean[i]));
    if (p.band) {
      const double m = s.mean[i];
      const double sd = s.std[i];
      double lo = m - sd;
      if (spec.log_y) lo = std::max(lo, m / 100.0);
      p.lo.push_back(std::isfinite(sd) ? ty(lo) : nan);
      p.hi.push_back(std::isfinite(sd) ? ty(m + sd) : nan);
    }
  }
  return p;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  if (series.empty()) fail(ErrorCode::invalid_argument, "plot: no series");
  std::vector<Prepared> prepared;
  for (const auto& s : series) prepared.push_back(prepare(s, spec));

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& p : prepared) {
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      if (std::isnan(p.y[i])) continue;
      x_min = std::min(x_min, p.x[i]);
      x_max = std::max(x_max, p.x[i]);
      y_min = std::min(y_min, p.y[i]);
      y_max = std::max(y_max, p.y[i]);
      if (p.band && !std::isnan(p.lo[i])) {
        y_min = std::min(y_min, p.lo[i]);
        y_max = std::max(y_max, p.hi[i]);
      }
    }
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
    fail(ErrorCode::invalid_argument, "plot: no finite values to draw");
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) {
    const double pad = std::max(std::abs(y_min) * 0.05, 0.5);
    y_min -= pad;
    y_max += pad;
  } else {
    const double pad = (y_max - y_min) * 0.04;
    y_min -= pad;
    y_max += pad;
  }

  const double W = spec.width, H = spec.height;
  const double pw = W - kMarginLeft - kMarginRight;
  const double ph = H - kMarginTop - kMarginBottom;
  auto sx = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return kMarginTop + (y_max - y) / (y_max - y_min) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
         "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(spec.title) + "</text>\n";
  if (!spec.subtitle.empty()) {
    out += "<text x=\"" + num(W / 2) + "\" y=\"40\" text-anchor=\"middle\" fill=\"#555\">" +
           escape(spec.subtitle) + "</text>\n";
  }

  // Axes and ticks.
  out += "<g stroke=\"#333\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop + ph) + "\" x2=\"" +
         num(kMarginLeft + pw) + "\" y2=\"" + num(kMarginTop + ph) + "\"/>\n";
  out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
         num(kMarginLeft) + "\" y2=\"" + num(kMarginTop + ph) + "\"/>\n";
  out += "</g>\n<g fill=\"#333\">\n";
  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    const double f = static_cast<double>(i) / (kTicks - 1);
    const double xv = x_min + f * (x_max - x_min);
    const double yv = y_min + f * (y_max - y_min);
    out += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(kMarginTop + ph + 18) +
           "\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
    out += "<text x=\"" + num(kMarginLeft - 6) + "\" y=\"" + num(sy(yv) + 4) +
           "\" text-anchor=\"end\">" + tick_label(yv) + "</text>\n";
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" +
           num(kMarginLeft + pw) + "\" y2=\"" + num(sy(yv)) +
           "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
  }
  out += "<text x=\"" + num(kMarginLeft + pw / 2) + "\" y=\"" + num(H - 12) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  const std::string ylab = spec.log_y ? "ln(" + spec.y_label + ")" : spec.y_label;
  out += "<text transform=\"translate(18 " + num(kMarginTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylab) + "</text>\n";
  out += "</g>\n";

  for (std::size_t k = 0; k < prepared.size(); ++k) {
    const auto& p = prepared[k];
    const std::string color = kPalette[k % std::size(kPalette)];
    if (p.band) {
      // One polygon per run of points with a finite band.
      std::size_t i = 0;
      while (i < p.x.size()) {
        while (i < p.x.size() && (std::isnan(p.lo[i]) || std::isnan(p.hi[i]))) ++i;
        std::size_t j = i;
        while (j < p.x.size() && !std::isnan(p.lo[j]) && !std::isnan(p.hi[j])) ++j;
        if (j > i) {
          std::string pts;
          for (std::size_t a = i; a < j; ++a) pts += num(sx(p.x[a])) + "," + num(sy(p.hi[a])) + " ";
          for (std::size_t a = j; a-- > i;) pts += num(sx(p.x[a])) + "," + num(sy(p.lo[a])) + " ";
          pts.pop_back();
          out += "<polygon points=\"" + pts + "\" fill=\"" + color +
                 "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        }
        i = j;
      }
    }
    std::size_t i = 0;
    while (i < p.x.size()) {
      while (i < p.x.size() && std::isnan(p.y[i])) ++i;
      std::size_t j = i;
      while (j < p.x.size() && !std::isnan(p.y[j])) ++j;
      if (j > i) {
        std::string pts;
        for (std::size_t a = i; a < j; ++a) pts += num(sx(p.x[a])) + "," + num(sy(p.y[a])) + " ";
        pts.pop_back();
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"" +
               (series[k].dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
      }
      i = j;
    }
  }

  // Legend, top right inside the plot area.
  out += "<g>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = kMarginTop + 14 + 16 * static_cast<double>(k);
    const double x = kMarginLeft + pw - 150;
    const std::string color = kPalette[k % std::size(kPalette)];
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(y - 4) + "\" x2=\"" + num(x + 22) +
           "\" y2=\"" + num(y - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
           (series[k].dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    out += "<text x=\"" + num(x + 28) + "\" y=\"" + num(y) + "\">" + escape(series[k].label) +
           "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

void plot_summary_metric(const std::string& summary_csv, const std::string& metric,
                         const std::string& out_path, bool log_y, const std::string& subtitle) {
  const CsvTable table = read_csv(summary_csv);
  PlotSeries s;
  s.label = metric + " (mean +/- 1 std)";
  s.x = table.column_values("step");
  s.mean = table.column_values(metric + "_mean");
  const std::string std_col = metric + "_std";
  if (std::find(table.header.begin(), table.header.end(), std_col) != table.header.end()) {
    s.std = table.column_values(std_col);
  }
  PlotSpec spec;
  spec.title = metric;
  spec.subtitle = subtitle;
  spec.y_label = metric;
  spec.log_y = log_y;
  write_text_file(out_path, render_svg({s}, spec));
}

}  // namespace aomlab
