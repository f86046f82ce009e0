#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aomlab/data.hpp"
#include "aomlab/model.hpp"
#include "aomlab/optim.hpp"
#include "aomlab/rng.hpp"

namespace aomlab {

enum class SamplingMode { uniform_with_replacement, epoch_shuffle };

using IndexBatch = std::vector<std::size_t>;

/// Lazy source of index batches over {0, ..., n-1}.
class IndexSampler {
 public:
  IndexSampler(std::size_t n, std::size_t batch_size, SamplingMode mode, std::uint64_t seed);
  const IndexBatch& next();

 private:
  std::size_t n_;
  std::size_t batch_size_;
  SamplingMode mode_;
  Rng rng_;
  std::vector<std::size_t> perm_;
  std::size_t cursor_;
  IndexBatch batch_;
};

/// T batches; uniform mode draws i.i.d. indices with replacement, epoch mode
/// reshuffles 0..n-1 each epoch and deals consecutive chunks; when batch_size
/// does not divide n the last chunk of an epoch is shorter.
std::vector<IndexBatch> sample_indices(std::size_t n, std::size_t batch_size, SamplingMode mode,
                                       std::uint64_t seed, std::size_t steps);

struct TwinOptions {
  std::size_t steps = 1;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;  // drives initialization and index sampling
  std::size_t eval_every = 1;
  SamplingMode sampling = SamplingMode::uniform_with_replacement;
  bool record_diagnostics = false;
  // Ablation only: draw the second run's indices from an independent stream.
  bool decouple_indices = false;
  double divergence_threshold = 1e12;
  double v0 = 0.0;  // initial value of every second-moment coordinate
};

/// Per-step quantities needed to estimate the analysis constants and to check
/// the per-step difference inequalities. Index k refers to step k+1.
struct TwinDiagnostics {
  std::vector<std::uint8_t> hit;       // changed example present in the batch
  std::vector<double> eta;             // step size used
  std::vector<double> beta;            // second-moment coefficient used
  std::vector<double> grad_norm_max;   // max per-example gradient norm, both runs
  std::vector<double> loss_max;        // max per-example loss, both runs
  std::vector<double> v_min;           // min coordinate of v after the step, both runs
  std::vector<double> v_max;
  std::vector<double> smoothness;      // max |g(x)-g(x')|/|x-x'| on shared examples, 0 if none
};

/// Series for one trial. Index k holds the value after step k+1.
struct TwinTrace {
  std::size_t steps = 0;  // requested T
  std::vector<double> delta;
  std::vector<double> sigma;
  std::vector<double> train_loss;
  std::vector<double> test_loss;
  std::vector<double> gen_gap;
  std::optional<std::size_t> first_hit;  // 1-based step; empty means never
  bool diverged = false;
  std::size_t changed_index = 0;
  std::uint64_t data_hash = 0;  // twin datasets, initialization and index stream
  std::optional<TwinDiagnostics> diagnostics;

  std::size_t completed() const { return delta.size(); }
};

/// Seeds run_twin derives from options.seed for the shared initialization and
/// for the shared index stream.
std::uint64_t twin_init_seed(std::uint64_t seed);
std::uint64_t twin_index_seed(std::uint64_t seed);

/// Trains two coupled trajectories from the same initialization, reading batch
/// i_t from twin.s for the first and twin.s_prime for the second, and records
/// their divergence. Losses are those of the first run, evaluated every
/// `eval_every` steps (and at steps 1 and T) and held in between.
TwinTrace run_twin(const Problem& problem, const TwinPair& twin, const Dataset& test,
                   const Schedule& schedule, const TwinOptions& options);

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> std;  // sample standard deviation, 0 when K = 1
};

struct TrialSummary {
  std::size_t trials = 0;
  SeriesStats delta, sigma, train_loss, test_loss, gen_gap;

  std::size_t steps() const { return delta.mean.size(); }
};

/// Elementwise mean and sample standard deviation over traces of equal length.
TrialSummary aggregate_trials(const std::vector<TwinTrace>& traces);

struct GrowthFit {
  double r = 0.0;
  double r_stderr = 0.0;
};

/// Least-squares slope of log(value) against log(step) over the last
/// `window` fraction of steps; series[k] is the value at step k+1.
GrowthFit fit_growth_exponent(const std::vector<double>& series, double window = 0.5);

struct TrialPlan {
  std::size_t trials = 20;
  std::uint64_t base_seed = 0;
  std::size_t threads = 1;
  TwinOptions twin;  // `seed` is replaced per trial
};

struct TrialsResult {
  std::vector<TwinTrace> traces;  // every trial, including diverged ones
  TrialSummary summary;           // over non-diverged trials
  std::size_t diverged = 0;
};

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial_index);

/// Builds trial i's twin pair from `data`: a fresh replacement point from the
/// task distribution is swapped into a random training index.
TwinPair trial_twin(const SplitDataset& data, std::uint64_t seed);

/// Runs independent trials on a worker pool and aggregates the survivors.
/// Throws Error(all_diverged) when no trial finishes.
TrialsResult run_trials(const Problem& problem, const SplitDataset& data,
                        const Schedule& schedule, const TrialPlan& plan);

}  // namespace aomlab
