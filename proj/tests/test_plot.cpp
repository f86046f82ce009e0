#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aomlab/csv.hpp"
#include "aomlab/error.hpp"
#include "aomlab/plot.hpp"
#include "doctest.h"

using namespace aomlab;

namespace {

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("empty input is an error") {
  PlotSpec spec;
  CHECK_THROWS_AS(render_svg({}, spec), Error);
  CHECK_THROWS_AS(render_svg({PlotSeries{"a", {}, {}, {}, false}}, spec), Error);
  CHECK_THROWS_AS(render_svg({PlotSeries{"a", {1, 2}, {1}, {}, false}}, spec), Error);
}

TEST_CASE("two points give a single segment, byte-identical across calls") {
  PlotSpec spec;
  spec.title = "t";
  const std::vector<PlotSeries> s = {{"delta", {1.0, 2.0}, {0.5, 1.5}, {}, false}};
  const auto a = render_svg(s, spec);
  const auto b = render_svg(s, spec);
  CHECK(a == b);
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(count_of(a, "<polyline") == 1);
  // one polyline with exactly two vertices
  const auto start = a.find("points=\"", a.find("<polyline")) + 8;
  const auto pts = a.substr(start, a.find('"', start) - start);
  CHECK(count_of(pts, ",") == 2);
}

TEST_CASE("std bands add a filled polygon") {
  PlotSpec spec;
  const auto svg = render_svg({{"m", {1, 2, 3}, {1, 2, 3}, {0.1, 0.1, 0.1}, false}}, spec);
  CHECK(count_of(svg, "<polygon") == 1);
}

TEST_CASE("log axis transforms and rejects non-positive values") {
  PlotSpec spec;
  spec.log_y = true;
  spec.y_label = "loss";
  CHECK_THROWS_AS(render_svg({{"m", {1, 2}, {1.0, 0.0}, {}, false}}, spec), Error);
  const auto lin_spec = PlotSpec{};
  // a geometric series is a straight line on the log axis: equal vertical steps
  const auto svg = render_svg({{"m", {1, 2, 3}, {1.0, std::exp(1.0), std::exp(2.0)}, {}, false}},
                              spec);
  CHECK(svg.find("ln(loss)") != std::string::npos);
  const auto start = svg.find("points=\"", svg.find("<polyline")) + 8;
  std::istringstream pts(svg.substr(start, svg.find('"', start) - start));
  double y[3];
  for (double& v : y) {
    std::string xy;
    pts >> xy;
    v = std::stod(xy.substr(xy.find(',') + 1));
  }
  CHECK(y[0] - y[1] == doctest::Approx(y[1] - y[2]).epsilon(1e-3));
  (void)lin_spec;
}

TEST_CASE("non-finite values become gaps") {
  PlotSpec spec;
  const auto svg = render_svg({{"m", {1, 2, 3, 4, 5}, {1, 2, NAN, 4, 5}, {}, false}}, spec);
  CHECK(count_of(svg, "<polyline") == 2);
}

TEST_CASE("long series are thinned") {
  PlotSpec spec;
  spec.max_points = 100;
  std::vector<double> x(10000), y(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i + 1);
    y[i] = std::sqrt(x[i]);
  }
  const auto svg = render_svg({{"m", x, y, {}, false}}, spec);
  const auto start = svg.find("points=\"", svg.find("<polyline")) + 8;
  const auto pts = svg.substr(start, svg.find('"', start) - start);
  CHECK(count_of(pts, ",") <= 101);
}

TEST_CASE("plot_summary_metric reads a summary CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "aomlab_test_plot";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "summary.csv").string();
  write_text_file(csv, "step,delta_mean,delta_std\n1,0,0\n2,0.5,0.1\n3,0.7,0.2\n");
  const auto out = (dir / "delta.svg").string();
  plot_summary_metric(csv, "delta", out, false);
  const auto first = slurp(out);
  CHECK(first.find("<svg") != std::string::npos);
  plot_summary_metric(csv, "delta", out, false);
  CHECK(slurp(out) == first);
  CHECK_THROWS_AS(plot_summary_metric(csv, "sigma", out, false), Error);
  std::filesystem::remove_all(dir);
}
