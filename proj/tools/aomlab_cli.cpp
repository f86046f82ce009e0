// Command-line front end over the C interface.
//
//   aomlab run <config> [--seed N] [--trials K] [--out DIR]
//   aomlab sweep <config> [--param KEY --values v1,v2,...] [--seed N] [--trials K] [--out DIR]
//   aomlab plot <summary.csv> --metric NAME [--log] [--out FILE]
//   aomlab bounds <config> [--out DIR]

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aomlab/aomlab.h"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out;
};

// Exit codes: 0 ok, 1 usage or config error, 2 all trials diverged, 3 I/O.
int exit_code(aomlab_status s) {
  switch (s) {
    case AOMLAB_OK: return 0;
    case AOMLAB_ERR_ALL_DIVERGED: return 2;
    case AOMLAB_ERR_IO: return 3;
    default: return 1;
  }
}

int report(aomlab_status s) {
  if (s != AOMLAB_OK) {
    std::cerr << "aomlab: " << aomlab_status_name(s) << ": " << aomlab_last_error() << "\n";
  }
  return exit_code(s);
}

class ConfigHandle {
 public:
  ~ConfigHandle() { aomlab_config_free(ptr_); }
  aomlab_config* get() { return ptr_; }
  aomlab_config** out() { return &ptr_; }

 private:
  aomlab_config* ptr_ = nullptr;
};

class ResultHandle {
 public:
  ~ResultHandle() { aomlab_result_free(ptr_); }
  aomlab_result* get() { return ptr_; }
  aomlab_result** out() { return &ptr_; }

 private:
  aomlab_result* ptr_ = nullptr;
};

aomlab_status load_with_overrides(const std::string& path, const Overrides& o, ConfigHandle& cfg) {
  aomlab_status s = aomlab_config_load(path.c_str(), cfg.out());
  if (s != AOMLAB_OK) return s;
  if (o.seed) {
    s = aomlab_config_set(cfg.get(), "experiment.base_seed", std::to_string(*o.seed).c_str());
    if (s != AOMLAB_OK) return s;
  }
  if (o.trials) {
    s = aomlab_config_set(cfg.get(), "experiment.trials", std::to_string(*o.trials).c_str());
    if (s != AOMLAB_OK) return s;
  }
  if (o.out) s = aomlab_config_set(cfg.get(), "experiment.output_dir", o.out->c_str());
  return s;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override experiment.base_seed");
  cmd->add_option("--trials", o.trials, "Override experiment.trials (K)");
  cmd->add_option("--out", o.out, "Override experiment.output_dir");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aomlab: adaptive optimizer stability experiments and bounds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(aomlab_version()));

  std::string config_path;
  Overrides overrides;

  auto* run = app.add_subcommand("run", "Run the twin-trajectory experiment of a config");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_overrides(run, overrides);

  std::optional<std::string> param;
  std::optional<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a parameter");
  sweep->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "Sweepable key: beta2, weight_decay, lr, preset");
  sweep->add_option("--values", values, "Comma-separated values");
  add_overrides(sweep, overrides);

  std::string summary_path;
  std::string metric;
  bool log_y = false;
  std::optional<std::string> plot_out;
  auto* plot = app.add_subcommand("plot", "Render one metric of a summary CSV as SVG");
  plot->add_option("summary", summary_path, "summary.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--metric", metric, "delta, sigma, train_loss, test_loss or gen_gap")
      ->required();
  plot->add_flag("--log", log_y, "Plot the natural log of the values");
  plot->add_option("--out", plot_out, "Output SVG (default: <metric>.svg next to the summary)");

  auto* bounds = app.add_subcommand("bounds", "Write bound curves for a config without training");
  bounds->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  bounds->add_option("--out", overrides.out, "Override experiment.output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*plot) {
    const std::string out =
        plot_out ? *plot_out
                 : (std::filesystem::path(summary_path).parent_path() / (metric + ".svg")).string();
    const aomlab_status s = aomlab_plot(summary_path.c_str(), metric.c_str(), log_y, out.c_str());
    if (s == AOMLAB_OK) std::cout << "wrote " << out << "\n";
    return report(s);
  }

  ConfigHandle cfg;
  aomlab_status s = load_with_overrides(config_path, overrides, cfg);
  if (s != AOMLAB_OK) return report(s);

  ResultHandle result;
  if (*run) {
    s = aomlab_run(cfg.get(), result.out());
  } else if (*sweep) {
    if (param.has_value() != values.has_value()) {
      std::cerr << "aomlab: --param and --values go together\n";
      return 1;
    }
    s = aomlab_sweep(cfg.get(), param ? param->c_str() : nullptr,
                     values ? values->c_str() : nullptr, result.out());
  } else {
    s = aomlab_bounds(cfg.get(), result.out());
  }
  if (s == AOMLAB_OK) std::cout << aomlab_result_summary(result.get()) << std::endl;
  return report(s);
}
