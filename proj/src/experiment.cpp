#include "aomlab/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <thread>

#include "aomlab/csv.hpp"
#include "aomlab/error.hpp"
#include "aomlab/plot.hpp"

namespace aomlab {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    fail(ErrorCode::io, "cannot create output directory '" + dir + "': " + ec.message());
  }
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::uint64_t combine_hashes(const std::vector<TwinTrace>& traces) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& tr : traces) {
    for (int b = 0; b < 8; ++b) {
      h ^= (tr.data_hash >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::vector<double> steps_axis(std::size_t n, std::size_t first = 1) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(first + i);
  return x;
}

std::string epochs_note(const ExperimentConfig& c) {
  const double epochs = static_cast<double>(c.steps) * static_cast<double>(c.batch_size) /
                        static_cast<double>(kTrainSize);
  return std::to_string(c.trials) + " trials, batch " + std::to_string(c.batch_size) + ", " +
         std::to_string(c.steps) + " steps = " + short_real(epochs) +
         " epochs (epochs = steps*batch/n)";
}

struct MetricPlot {
  const char* name;
  const char* label;
  bool log_y;
};

constexpr MetricPlot kMetrics[] = {
    {"delta", "parameter distance", false},
    {"sigma", "second-moment distance", false},
    {"gen_gap", "generalization gap", false},
    {"train_loss", "train loss", true},
    {"test_loss", "test loss", true},
};

const SeriesStats& metric_stats(const TrialSummary& s, const std::string& name) {
  if (name == "delta") return s.delta;
  if (name == "sigma") return s.sigma;
  if (name == "gen_gap") return s.gen_gap;
  if (name == "train_loss") return s.train_loss;
  if (name == "test_loss") return s.test_loss;
  fail(ErrorCode::invalid_argument, "unknown metric '" + name + "'");
}

// Zeros become gaps so that a log axis can show the rest of the curve.
std::vector<double> positive_or_nan(const std::vector<double>& v) {
  std::vector<double> out(v);
  for (double& x : out) {
    if (!(x > 0.0)) x = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

void write_bounds_plot(const std::string& path, const BoundsTable& table,
                       const TrialSummary* measured, const std::string& subtitle) {
  std::vector<PlotSeries> series;
  std::vector<double> x;
  for (auto t : table.t) x.push_back(static_cast<double>(t));
  if (measured) {
    PlotSeries m{"measured delta (mean +/- 1 std)", {}, {}, {}, false};
    for (auto t : table.t) {
      const auto k = static_cast<std::size_t>(t - 1);
      m.x.push_back(static_cast<double>(t));
      m.mean.push_back(measured->delta.mean[k]);
      m.std.push_back(measured->delta.std[k]);
    }
    m.mean = positive_or_nan(m.mean);
    series.push_back(std::move(m));
  }
  series.push_back({"delta bound (recursion)", x, positive_or_nan(table.delta_bound), {}, true});
  for (const auto& [name, values] : table.closed_forms) {
    if (name == "adamw_fp") series.push_back({"adamw fixed point", x, positive_or_nan(values), {}, true});
  }
  PlotSpec spec;
  spec.title = measured ? "delta vs bound" : "delta bound";
  spec.subtitle = subtitle;
  spec.y_label = "delta";
  spec.log_y = true;
  write_text_file(path, render_svg(series, spec));
}

}  // namespace

std::size_t worker_count(const ExperimentConfig& config) {
  std::size_t n = config.threads;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AOMLAB_THREADS"); env && *env) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1) {
      fail(ErrorCode::config, std::string("AOMLAB_THREADS: expected a positive integer, got '") +
                                  env + "'");
    }
    n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

BoundConstants resolve_bound_constants(const ExperimentConfig& config,
                                       const std::vector<TwinTrace>* traces,
                                       std::vector<std::string>* warnings) {
  if (!config.bounds) fail(ErrorCode::config, "bounds: config has no [bounds] section");
  const BoundsConfig& b = *config.bounds;
  BoundConstants k;
  k.n = static_cast<int>(kTrainSize);
  k.epsilon = config.epsilon;
  k.c = config.lr;
  k.alpha = config.alpha;
  k.beta = config.beta2;

  if (traces) {
    std::vector<TwinTrace> usable;
    for (const auto& tr : *traces) {
      if (!tr.diverged) usable.push_back(tr);
    }
    const ConstantEstimate est = estimate_constants(usable.empty() ? *traces : usable, k);
    k = est.constants;
    if (warnings) {
      warnings->insert(warnings->end(), est.warnings.begin(), est.warnings.end());
    }
  } else {
    auto require = [&](const std::optional<double>& v, const char* key) {
      if (!v) {
        fail(ErrorCode::config, std::string("bounds.") + key +
                                    ": needed when bounds are computed without a run");
      }
    };
    require(b.M, "M");
    require(b.lambda1, "lambda1");
    require(b.lambda2, "lambda2");
    if (b.constants == ConstantsSource::estimated || config.task != Task::toy) {
      require(b.mu, "mu");
      require(b.L, "L");
    }
  }
  if (b.constants == ConstantsSource::analytic && config.task == Task::toy) {
    // |f'| < 1 and 0 < f'' <= 1 for sqrt(1 + (x - z)^2).
    k.mu = 1.0;
    k.L = 1.0;
  }
  if (b.mu) k.mu = *b.mu;
  if (b.L) k.L = *b.L;
  if (b.M) k.M = *b.M;
  if (b.lambda1) k.lambda1 = *b.lambda1;
  if (b.lambda2) k.lambda2 = *b.lambda2;
  try {
    k.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config, std::string("bounds: ") + e.what());
  }
  return k;
}

BoundsTable compute_bounds(const ExperimentConfig& config, const BoundConstants& k) {
  if (!config.bounds) fail(ErrorCode::config, "bounds: config has no [bounds] section");
  const BoundsConfig& b = *config.bounds;
  const Schedule schedule = make_config_schedule(config);
  const auto T = static_cast<std::int64_t>(config.steps);

  BoundsTable table;
  table.constants = k;
  table.t0 = b.t0;
  const RecursionBound rec = recursion_bound(k, schedule, T, b.t0);
  for (std::int64_t t = b.t0 + 1; t <= T; ++t) {
    table.t.push_back(t);
    table.delta_bound.push_back(rec.delta[static_cast<std::size_t>(t - b.t0)]);
    table.sigma_bound.push_back(rec.sigma[static_cast<std::size_t>(t - b.t0)]);
  }
  for (const auto& name : b.overlay) {
    std::vector<double> col;
    col.reserve(table.t.size());
    if (name == "adamw_fp") {
      const auto fp = adamw_fixed_point(k, config.beta2, config.lr, config.weight_decay, b.literal_b);
      if (!fp.feasible) {
        table.warnings.push_back("adamw_fp: contraction not feasible (rho = " +
                                 short_real(fp.rho) + ")");
      }
      col.assign(table.t.size(), fp.feasible ? fp.bound : kInf);
    } else {
      for (auto t : table.t) {
        if (name == "cor1") {
          col.push_back(adagrad_bound_cor1(t, b.t0, k));
        } else if (name == "cor2") {
          col.push_back(adagrad_bound_cor2(static_cast<double>(t), k,
                                           {b.b_includes_mu, b.literal_exponent})
                            .bound);
        } else if (name == "coro") {
          col.push_back(adam_bound_coro(t, b.t0, config.beta2, k));
        }
      }
    }
    table.closed_forms.emplace_back(name, std::move(col));
  }
  return table;
}

std::string trace_csv(const TwinTrace& trace, std::size_t trial) {
  std::string out = "trial,step,delta,sigma,train_loss,test_loss,gen_gap\n";
  const std::string prefix = std::to_string(trial) + ",";
  for (std::size_t k = 0; k < trace.completed(); ++k) {
    out += prefix + std::to_string(k + 1) + "," + format_real(trace.delta[k]) + "," +
           format_real(trace.sigma[k]) + "," + format_real(trace.train_loss[k]) + "," +
           format_real(trace.test_loss[k]) + "," + format_real(trace.gen_gap[k]) + "\n";
  }
  return out;
}

std::string summary_csv(const TrialSummary& s) {
  std::string out =
      "step,delta_mean,delta_std,sigma_mean,sigma_std,train_loss_mean,train_loss_std,"
      "test_loss_mean,test_loss_std,gen_gap_mean,gen_gap_std\n";
  for (std::size_t k = 0; k < s.steps(); ++k) {
    out += std::to_string(k + 1);
    for (const SeriesStats* st : {&s.delta, &s.sigma, &s.train_loss, &s.test_loss, &s.gen_gap}) {
      out += "," + format_real(st->mean[k]) + "," + format_real(st->std[k]);
    }
    out += "\n";
  }
  return out;
}

std::string bounds_csv(const BoundsTable& table) {
  std::string out = "t,delta_bound,sigma_bound";
  for (const auto& cf : table.closed_forms) out += "," + cf.first;
  out += "\n";
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    out += std::to_string(table.t[i]) + "," + format_real(table.delta_bound[i]) + "," +
           format_real(table.sigma_bound[i]);
    for (const auto& cf : table.closed_forms) out += "," + format_real(cf.second[i]);
    out += "\n";
  }
  return out;
}

ResultBundle run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  ResultBundle bundle;
  bundle.config = config;

  const Problem problem = make_problem(config);
  const Schedule schedule = make_config_schedule(config);
  const SplitDataset data = generate(config.task, config.base_seed);

  TrialPlan plan;
  plan.trials = config.trials;
  plan.base_seed = config.base_seed;
  plan.threads = worker_count(config);
  plan.twin.steps = config.steps;
  plan.twin.batch_size = config.batch_size;
  plan.twin.eval_every = config.eval_every;
  plan.twin.sampling = config.sampling;
  plan.twin.decouple_indices = config.decouple_indices;
  plan.twin.record_diagnostics = config.bounds.has_value();
  plan.twin.v0 = config.v0;

  bundle.trials = run_trials(problem, data, schedule, plan);
  bundle.data_hash = combine_hashes(bundle.trials.traces);
  const TrialSummary& summary = bundle.trials.summary;
  if (config.fit_growth) {
    bundle.growth = fit_growth_exponent(summary.delta.mean, config.growth_window);
  }
  if (config.bounds) {
    std::vector<std::string> warnings;
    const BoundConstants k = resolve_bound_constants(config, &bundle.trials.traces, &warnings);
    bundle.bounds = compute_bounds(config, k);
    bundle.bounds->warnings.insert(bundle.bounds->warnings.begin(), warnings.begin(),
                                   warnings.end());
  }

  ensure_dir(config.output_dir);
  auto write = [&](const std::string& file, const std::string& contents) {
    const std::string path = join(config.output_dir, file);
    write_text_file(path, contents);
    bundle.files.push_back(path);
  };
  for (std::size_t i = 0; i < bundle.trials.traces.size(); ++i) {
    write("trace_trial_" + std::to_string(i) + ".csv", trace_csv(bundle.trials.traces[i], i));
  }
  write("summary.csv", summary_csv(summary));
  const std::string note = epochs_note(config);
  const auto x = steps_axis(summary.steps());
  for (const auto& m : kMetrics) {
    const SeriesStats& st = metric_stats(summary, m.name);
    PlotSpec spec;
    spec.title = std::string(m.label) + " (" + config.name + ")";
    spec.subtitle = note;
    spec.y_label = m.name;
    spec.log_y = m.log_y;
    write(std::string(m.name) + ".svg",
          render_svg({{std::string(m.name) + " (mean +/- 1 std)", x, st.mean, st.std, false}},
                     spec));
  }
  if (bundle.bounds) {
    write("bounds.csv", bounds_csv(*bundle.bounds));
    const std::string path = join(config.output_dir, "delta_vs_bound.svg");
    write_bounds_plot(path, *bundle.bounds, &summary, note);
    bundle.files.push_back(path);
  }

  const std::size_t T = summary.steps();
  std::string line = config.name + ": T=" + std::to_string(T) +
                     " K=" + std::to_string(config.trials) +
                     " delta_T=" + short_real(summary.delta.mean[T - 1]) + " (std " +
                     short_real(summary.delta.std[T - 1]) + ")" +
                     " gen_gap_T=" + short_real(summary.gen_gap.mean[T - 1]);
  if (bundle.growth) {
    line += " r=" + short_real(bundle.growth->r) + " (stderr " +
            short_real(bundle.growth->r_stderr) + ")";
  }
  if (bundle.bounds) {
    line += " delta_bound_T=" + short_real(bundle.bounds->delta_bound.back());
  }
  line += " diverged=" + std::to_string(bundle.trials.diverged) + "/" +
          std::to_string(config.trials);
  bundle.summary_line = line;
  return bundle;
}

BoundsTable run_bounds(const ExperimentConfig& config, std::vector<std::string>* files) {
  validate_config(config);
  std::vector<std::string> warnings;
  const BoundConstants k = resolve_bound_constants(config, nullptr, &warnings);
  BoundsTable table = compute_bounds(config, k);
  table.warnings.insert(table.warnings.begin(), warnings.begin(), warnings.end());
  ensure_dir(config.output_dir);
  const std::string csv = join(config.output_dir, "bounds.csv");
  write_text_file(csv, bounds_csv(table));
  const std::string svg = join(config.output_dir, "delta_bound.svg");
  write_bounds_plot(svg, table, nullptr, config.name);
  if (files) {
    files->push_back(csv);
    files->push_back(svg);
  }
  return table;
}

SweepBundle run_sweep(const ExperimentConfig& config, const std::string& param,
                      const std::vector<std::string>& values) {
  ExperimentConfig base = config;
  base.sweep_param = param;
  base.sweep_values = values;
  validate_config(base);
  base.sweep_param.clear();
  base.sweep_values.clear();

  SweepBundle bundle;
  bundle.param = param;
  for (const auto& value : values) {
    ExperimentConfig c = base;
    set_config_value(c, param, value);
    c.name = base.name + "_" + param + "_" + value;
    c.output_dir = join(base.output_dir, param + "_" + value);
    bundle.points.push_back({value, run_experiment(c)});
  }

  ensure_dir(base.output_dir);
  std::string csv =
      "value,final_delta_mean,final_delta_std,final_gen_gap_mean,final_gen_gap_std,"
      "final_train_loss_mean,final_test_loss_mean,growth_r,growth_r_stderr,diverged,data_hash\n";
  std::string line = base.name + " sweep " + param + ":";
  for (const auto& p : bundle.points) {
    const TrialSummary& s = p.result.trials.summary;
    const std::size_t k = s.steps() - 1;
    const GrowthFit g = p.result.growth.value_or(fit_growth_exponent(s.delta.mean, base.growth_window));
    csv += p.value + "," + format_real(s.delta.mean[k]) + "," + format_real(s.delta.std[k]) + "," +
           format_real(s.gen_gap.mean[k]) + "," + format_real(s.gen_gap.std[k]) + "," +
           format_real(s.train_loss.mean[k]) + "," + format_real(s.test_loss.mean[k]) + "," +
           format_real(g.r) + "," + format_real(g.r_stderr) + "," +
           std::to_string(p.result.trials.diverged) + "," + hex64(p.result.data_hash) + "\n";
    line += " " + p.value + "->delta_T=" + short_real(s.delta.mean[k]);
  }
  const std::string csv_path = join(base.output_dir, "sweep_summary.csv");
  write_text_file(csv_path, csv);
  bundle.files.push_back(csv_path);

  const std::string note = epochs_note(base);
  for (const auto& m : kMetrics) {
    std::vector<PlotSeries> series;
    for (const auto& p : bundle.points) {
      const TrialSummary& s = p.result.trials.summary;
      const SeriesStats& st = metric_stats(s, m.name);
      series.push_back({param + " = " + p.value, steps_axis(s.steps()), st.mean, st.std, false});
    }
    PlotSpec spec;
    spec.title = std::string(m.label) + " by " + param + " (" + base.name + ")";
    spec.subtitle = note;
    spec.y_label = m.name;
    spec.log_y = m.log_y;
    const std::string path = join(base.output_dir, std::string("sweep_") + m.name + ".svg");
    write_text_file(path, render_svg(series, spec));
    bundle.files.push_back(path);
  }
  bundle.summary_line = line;
  return bundle;
}

}  // namespace aomlab
