#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aomlab/bounds.hpp"
#include "aomlab/data.hpp"
#include "aomlab/model.hpp"
#include "aomlab/optim.hpp"
#include "aomlab/stability.hpp"

namespace aomlab {

enum class ConstantsSource { analytic, estimated };

/// Which bound curves to compute next to the measured trajectories.
struct BoundsConfig {
  ConstantsSource constants = ConstantsSource::analytic;
  std::vector<std::string> overlay;  // subset of cor1, cor2, coro, adamw_fp
  std::int64_t t0 = 0;
  // Explicit values win over analytic or estimated ones.
  std::optional<double> mu, L, M, lambda1, lambda2;
  bool b_includes_mu = true;
  bool literal_b = false;
  bool literal_exponent = false;

  bool operator==(const BoundsConfig&) const = default;
};

struct ExperimentConfig {
  // [experiment]
  std::string name = "experiment";
  Task task = Task::cls;
  std::size_t steps = 1000;
  std::size_t trials = 20;
  std::size_t batch_size = 3;
  std::uint64_t base_seed = 0;
  std::size_t eval_every = 1;
  std::string output_dir = "out";
  SamplingMode sampling = SamplingMode::uniform_with_replacement;
  std::size_t threads = 0;  // 0: machine default
  bool fit_growth = false;
  double growth_window = 0.5;
  bool decouple_indices = false;

  // [model]
  int hidden_dim = 1024;
  Activation activation = Activation::relu;

  // [optimizer]
  Preset preset = Preset::adam;
  BetaRule beta_rule = BetaRule::constant;  // custom preset: beta2 or 1 - alpha/t
  double beta1 = 0.0;
  double beta2 = 0.999;
  double alpha = 1.0;
  double lr = 1e-3;
  StepRule lr_schedule = StepRule::constant;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  double v0 = 0.0;

  // [bounds]
  std::optional<BoundsConfig> bounds;

  // [sweep]
  std::string sweep_param;
  std::vector<std::string> sweep_values;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Task-dependent defaults: batch 3 / hidden 1024 for cls_blobs, batch 5 /
/// hidden 128 for reg_quadratic, batch 1 for the toy.
ExperimentConfig default_config(Task task);

/// Sectioned key/value text:
///
///   # comment
///   [experiment]
///   task = cls_blobs
///   steps = 5000
///
/// Unknown sections or keys, duplicates and malformed lines are rejected with
/// Error(config) carrying the line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Sets one key, addressed as `section.key` or by a bare key when it is
/// unambiguous (e.g. `beta2`), then revalidates.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Throws Error(config) naming the offending key.
void validate_config(const ExperimentConfig& config);

Problem make_problem(const ExperimentConfig& config);
Schedule make_config_schedule(const ExperimentConfig& config);

const char* config_task_name(Task task);
Task parse_config_task(const std::string& name);

}  // namespace aomlab
