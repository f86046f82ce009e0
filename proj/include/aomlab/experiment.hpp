#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aomlab/bounds.hpp"
#include "aomlab/config.hpp"
#include "aomlab/stability.hpp"

namespace aomlab {

/// Bound curves for steps t0+1..T. Closed forms are evaluated with horizon t.
struct BoundsTable {
  BoundConstants constants;
  std::vector<std::string> warnings;
  std::int64_t t0 = 0;
  std::vector<std::int64_t> t;
  std::vector<double> delta_bound;
  std::vector<double> sigma_bound;
  std::vector<std::pair<std::string, std::vector<double>>> closed_forms;
};

struct ResultBundle {
  ExperimentConfig config;
  TrialsResult trials;
  std::optional<GrowthFit> growth;
  std::optional<BoundsTable> bounds;
  std::uint64_t data_hash = 0;  // over every trial's twin data, init and indices
  std::vector<std::string> files;
  std::string summary_line;
};

struct SweepPoint {
  std::string value;
  ResultBundle result;
};

struct SweepBundle {
  std::string param;
  std::vector<SweepPoint> points;
  std::vector<std::string> files;
  std::string summary_line;
};

/// Worker threads for a config: `threads`, or the hardware concurrency when
/// 0, capped by the AOMLAB_THREADS environment variable when set.
std::size_t worker_count(const ExperimentConfig& config);

/// Constants for the bound evaluator. Analytic: mu = L = 1 for the toy loss,
/// M, lambda1, lambda2 from `traces`. Estimated: everything measurable from
/// `traces`. Explicit config values always win. Without traces every
/// quantity that would be measured must be set explicitly.
BoundConstants resolve_bound_constants(const ExperimentConfig& config,
                                       const std::vector<TwinTrace>* traces,
                                       std::vector<std::string>* warnings = nullptr);

BoundsTable compute_bounds(const ExperimentConfig& config, const BoundConstants& constants);

std::string trace_csv(const TwinTrace& trace, std::size_t trial);
std::string summary_csv(const TrialSummary& summary);
std::string bounds_csv(const BoundsTable& table);

/// Runs the configured twin trials and writes traces, summary, optional
/// bounds and plots under config.output_dir.
ResultBundle run_experiment(const ExperimentConfig& config);

/// Bound curves only (no training); writes bounds.csv and its plot.
BoundsTable run_bounds(const ExperimentConfig& config, std::vector<std::string>* files = nullptr);

/// One experiment per value of `param`, each in `<output_dir>/<param>_<value>`,
/// all sharing the base data and trial seeds; writes sweep_summary.csv and
/// comparison plots.
SweepBundle run_sweep(const ExperimentConfig& config, const std::string& param,
                      const std::vector<std::string>& values);

}  // namespace aomlab
