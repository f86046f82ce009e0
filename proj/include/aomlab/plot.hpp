#pragma once

#include <string>
#include <vector>

namespace aomlab {

/// One curve: y = mean over x, optionally with a +/- std band (empty std
/// means no band).
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string subtitle;
  std::string x_label = "step";
  std::string y_label;
  bool log_y = false;  // plot ln(y); every plotted value must be > 0
  int width = 720;
  int height = 440;
  std::size_t max_points = 1000;  // longer series are thinned evenly
};

/// Static SVG line chart. Throws Error(invalid_argument) on an empty series,
/// mismatched lengths or non-positive values on a log axis.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec);

/// Plots `<metric>_mean` (and `<metric>_std` when present) from a summary CSV
/// against its `step` column and writes the SVG to `out_path`.
void plot_summary_metric(const std::string& summary_csv, const std::string& metric,
                         const std::string& out_path, bool log_y,
                         const std::string& subtitle = "");

}  // namespace aomlab
