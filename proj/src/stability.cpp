#include "aomlab/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <numeric>
#include <thread>

#include "aomlab/error.hpp"

namespace aomlab {

IndexSampler::IndexSampler(std::size_t n, std::size_t batch_size, SamplingMode mode,
                           std::uint64_t seed)
    : n_(n), batch_size_(batch_size), mode_(mode), rng_(seed), perm_(n), cursor_(n) {
  if (batch_size == 0 || batch_size > n) {
    fail(ErrorCode::invalid_argument, "batch_size must lie in [1, n]");
  }
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  batch_.reserve(batch_size);
}

const IndexBatch& IndexSampler::next() {
  batch_.clear();
  if (mode_ == SamplingMode::uniform_with_replacement) {
    for (std::size_t b = 0; b < batch_size_; ++b) {
      batch_.push_back(static_cast<std::size_t>(rng_.below(n_)));
    }
    return batch_;
  }
  if (cursor_ >= n_) {
    rng_.shuffle(perm_.begin(), perm_.end());
    cursor_ = 0;
  }
  const std::size_t end = std::min(n_, cursor_ + batch_size_);
  batch_.assign(perm_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                perm_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return batch_;
}

std::vector<IndexBatch> sample_indices(std::size_t n, std::size_t batch_size, SamplingMode mode,
                                       std::uint64_t seed, std::size_t steps) {
  IndexSampler sampler(n, batch_size, mode, seed);
  std::vector<IndexBatch> out;
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) out.push_back(sampler.next());
  return out;
}

namespace {

constexpr std::uint64_t kInitSalt = 0x696e6974;     // "init"
constexpr std::uint64_t kIndexSalt = 0x696e646578;  // "index"
constexpr std::uint64_t kTwinSalt = 0x7477696e;     // "twin"
constexpr std::uint64_t kDecoupledSalt = 0x6465636f;

// FNV-1a over raw bytes.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void value(double v) { bytes(&v, sizeof v); }
  void value(std::uint64_t v) { bytes(&v, sizeof v); }
  void dataset(const Dataset& d) {
    for (const auto& ex : d.examples) {
      for (double f : ex.features) value(f);
      value(ex.target);
    }
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

double vector_norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

void gather(const Dataset& source, const IndexBatch& idx, std::vector<Example>& out) {
  out.clear();
  for (auto i : idx) out.push_back(source.examples[i]);
}

struct StepGrad {
  LossGrad batch;
  double grad_norm_max = 0.0;
  double loss_max = 0.0;
  std::vector<ParamVector> per_example;
};

// Batch gradient; in diagnostic mode the per-example gradients are kept too.
StepGrad step_gradient(const Problem& problem, const ParamVector& x,
                       const std::vector<Example>& batch, bool diagnostics) {
  StepGrad out;
  if (!diagnostics) {
    out.batch = loss_and_grad(problem, x, batch);
    return out;
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  out.batch.grad.assign(x.size(), 0.0);
  for (const auto& ex : batch) {
    LossGrad one = loss_and_grad(problem, x, std::span<const Example>(&ex, 1));
    out.grad_norm_max = std::max(out.grad_norm_max, vector_norm(one.grad));
    out.loss_max = std::max(out.loss_max, one.loss);
    out.batch.loss += scale * one.loss;
    for (std::size_t i = 0; i < x.size(); ++i) out.batch.grad[i] += scale * one.grad[i];
    out.per_example.push_back(std::move(one.grad));
  }
  return out;
}

}  // namespace

std::uint64_t twin_init_seed(std::uint64_t seed) { return derive_seed(seed, kInitSalt); }

std::uint64_t twin_index_seed(std::uint64_t seed) { return derive_seed(seed, kIndexSalt); }

TwinTrace run_twin(const Problem& problem, const TwinPair& twin, const Dataset& test,
                   const Schedule& schedule, const TwinOptions& options) {
  if (options.steps == 0) fail(ErrorCode::invalid_argument, "run_twin: steps must be >= 1");
  if (options.eval_every == 0) fail(ErrorCode::invalid_argument, "run_twin: eval_every must be >= 1");
  const std::size_t n = twin.s.size();
  if (n == 0 || twin.s_prime.size() != n || twin.changed_index >= n) {
    fail(ErrorCode::invalid_argument, "run_twin: invalid twin pair");
  }
  if (test.examples.empty()) fail(ErrorCode::invalid_argument, "run_twin: empty test set");
  schedule.validate();

  const std::size_t T = options.steps;
  const bool diag = options.record_diagnostics;

  TwinTrace trace;
  trace.steps = T;
  trace.changed_index = twin.changed_index;
  for (auto* series : {&trace.delta, &trace.sigma, &trace.train_loss, &trace.test_loss,
                       &trace.gen_gap}) {
    series->reserve(T);
  }
  if (diag) trace.diagnostics.emplace();

  const ParamVector x0 = init_params(problem, twin_init_seed(options.seed));
  OptState run1 = OptState::fresh(x0, options.v0);
  OptState run2 = run1;

  const std::uint64_t index_seed = twin_index_seed(options.seed);
  IndexSampler sampler1(n, options.batch_size, options.sampling, index_seed);
  IndexSampler sampler2(n, options.batch_size, options.sampling,
                        options.decouple_indices ? derive_seed(index_seed, kDecoupledSalt)
                                                 : index_seed);

  Fnv1a hash;
  hash.dataset(twin.s);
  hash.dataset(twin.s_prime);
  hash.value(static_cast<std::uint64_t>(twin.changed_index));
  for (double v : x0) hash.value(v);

  std::vector<Example> batch1, batch2;
  double train_loss = 0.0;
  double test_loss = 0.0;

  for (std::size_t step = 1; step <= T; ++step) {
    const IndexBatch idx1 = sampler1.next();
    const IndexBatch& idx2 = options.decouple_indices ? sampler2.next() : idx1;
    for (auto i : idx1) hash.value(static_cast<std::uint64_t>(i));

    const bool hit = std::find(idx1.begin(), idx1.end(), twin.changed_index) != idx1.end() ||
                     std::find(idx2.begin(), idx2.end(), twin.changed_index) != idx2.end();
    if (hit && !trace.first_hit) trace.first_hit = step;

    gather(twin.s, idx1, batch1);
    gather(twin.s_prime, idx2, batch2);

    const double delta_before = diag ? param_distance(run1.x, run2.x) : 0.0;
    try {
      StepGrad g1 = step_gradient(problem, run1.x, batch1, diag);
      StepGrad g2 = step_gradient(problem, run2.x, batch2, diag);
      if (!(std::abs(g1.batch.loss) <= options.divergence_threshold) ||
          !(std::abs(g2.batch.loss) <= options.divergence_threshold)) {
        trace.diverged = true;
        break;
      }

      if (diag) {
        auto& d = *trace.diagnostics;
        const auto t = static_cast<std::int64_t>(step);
        d.hit.push_back(hit ? 1 : 0);
        d.eta.push_back(schedule.eta_of_t(t));
        d.beta.push_back(schedule.beta_of_t(t));
        d.grad_norm_max.push_back(std::max(g1.grad_norm_max, g2.grad_norm_max));
        d.loss_max.push_back(std::max(g1.loss_max, g2.loss_max));
        double smooth = 0.0;
        if (delta_before > 0.0 && !options.decouple_indices) {
          for (std::size_t b = 0; b < idx1.size(); ++b) {
            if (idx1[b] == twin.changed_index) continue;
            smooth = std::max(smooth, param_distance(g1.per_example[b], g2.per_example[b]) /
                                          delta_before);
          }
        }
        d.smoothness.push_back(smooth);
      }

      aom_step_inplace(run1, g1.batch.grad, schedule);
      aom_step_inplace(run2, g2.batch.grad, schedule);

      if (step == 1 || step == T || step % options.eval_every == 0) {
        train_loss = loss_only(problem, run1.x, twin.s.examples);
        test_loss = loss_only(problem, run1.x, test.examples);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::numeric) throw;
      trace.diverged = true;
    }
    if (trace.diverged || !(std::abs(train_loss) <= options.divergence_threshold) ||
        !(std::abs(test_loss) <= options.divergence_threshold)) {
      trace.diverged = true;
      if (diag) {
        // keep diagnostic series aligned with the completed steps
        auto& d = *trace.diagnostics;
        const std::size_t k = trace.delta.size();
        for (auto* s : {&d.eta, &d.beta, &d.grad_norm_max, &d.loss_max, &d.smoothness}) s->resize(k);
        d.hit.resize(k);
      }
      break;
    }

    const double delta = param_distance(run1.x, run2.x);
    const double sigma = param_distance(run1.v, run2.v);
    if (!std::isfinite(delta) || !std::isfinite(sigma)) {
      trace.diverged = true;
      if (diag) {
        auto& d = *trace.diagnostics;
        const std::size_t k = trace.delta.size();
        for (auto* s : {&d.eta, &d.beta, &d.grad_norm_max, &d.loss_max, &d.smoothness}) s->resize(k);
        d.hit.resize(k);
      }
      break;
    }
    trace.delta.push_back(delta);
    trace.sigma.push_back(sigma);
    trace.train_loss.push_back(train_loss);
    trace.test_loss.push_back(test_loss);
    trace.gen_gap.push_back(std::abs(test_loss - train_loss));

    if (diag) {
      auto& d = *trace.diagnostics;
      const auto [lo1, hi1] = std::minmax_element(run1.v.begin(), run1.v.end());
      const auto [lo2, hi2] = std::minmax_element(run2.v.begin(), run2.v.end());
      d.v_min.push_back(std::min(*lo1, *lo2));
      d.v_max.push_back(std::max(*hi1, *hi2));
    }
  }
  trace.data_hash = hash.digest();
  return trace;
}

namespace {

SeriesStats series_stats(const std::vector<const std::vector<double>*>& rows) {
  const std::size_t K = rows.size();
  const std::size_t T = rows.front()->size();
  SeriesStats s;
  s.mean.assign(T, 0.0);
  s.std.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const auto* r : rows) sum += (*r)[t];
    const double mean = sum / static_cast<double>(K);
    s.mean[t] = mean;
    if (K > 1) {
      double ss = 0.0;
      for (const auto* r : rows) {
        const double d = (*r)[t] - mean;
        ss += d * d;
      }
      s.std[t] = std::sqrt(ss / static_cast<double>(K - 1));
    }
  }
  return s;
}

}  // namespace

TrialSummary aggregate_trials(const std::vector<TwinTrace>& traces) {
  if (traces.empty()) fail(ErrorCode::invalid_argument, "aggregate_trials: no traces");
  const std::size_t T = traces.front().delta.size();
  for (const auto& tr : traces) {
    for (const auto* s : {&tr.delta, &tr.sigma, &tr.train_loss, &tr.test_loss, &tr.gen_gap}) {
      if (s->size() != T) fail(ErrorCode::invalid_argument, "aggregate_trials: length mismatch");
    }
  }
  auto collect = [&](std::vector<double> TwinTrace::*member) {
    std::vector<const std::vector<double>*> rows;
    rows.reserve(traces.size());
    for (const auto& tr : traces) rows.push_back(&(tr.*member));
    return series_stats(rows);
  };
  TrialSummary out;
  out.trials = traces.size();
  out.delta = collect(&TwinTrace::delta);
  out.sigma = collect(&TwinTrace::sigma);
  out.train_loss = collect(&TwinTrace::train_loss);
  out.test_loss = collect(&TwinTrace::test_loss);
  out.gen_gap = collect(&TwinTrace::gen_gap);
  return out;
}

GrowthFit fit_growth_exponent(const std::vector<double>& series, double window) {
  if (!(window > 0.0 && window <= 1.0)) {
    fail(ErrorCode::invalid_argument, "fit_growth_exponent: window must lie in (0, 1]");
  }
  const std::size_t T = series.size();
  const auto first = static_cast<std::size_t>(std::floor(static_cast<double>(T) * (1.0 - window)));
  if (T < first + 3) fail(ErrorCode::invalid_argument, "fit_growth_exponent: need at least 3 points");

  const std::size_t count = T - first;
  std::vector<double> lx, ly;
  lx.reserve(count);
  ly.reserve(count);
  for (std::size_t k = first; k < T; ++k) {
    if (!(series[k] > 0.0) || !std::isfinite(series[k])) {
      fail(ErrorCode::invalid_argument,
           "fit_growth_exponent: non-positive value at step " + std::to_string(k + 1));
    }
    lx.push_back(std::log(static_cast<double>(k + 1)));
    ly.push_back(std::log(series[k]));
  }
  const double c = static_cast<double>(count);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / c;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / c;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  GrowthFit fit;
  fit.r = sxy / sxx;
  const double intercept = my - fit.r * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double e = ly[i] - (intercept + fit.r * lx[i]);
    sse += e * e;
  }
  fit.r_stderr = std::sqrt(sse / (c - 2.0) / sxx);
  return fit;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial_index) {
  return base_seed ^ splitmix64(0x747269616cULL + trial_index);
}

TwinPair trial_twin(const SplitDataset& data, std::uint64_t seed) {
  const Example replacement = draw_extra(data.train.task, seed);
  return make_twin(data.train, replacement, derive_seed(seed, kTwinSalt));
}

TrialsResult run_trials(const Problem& problem, const SplitDataset& data,
                        const Schedule& schedule, const TrialPlan& plan) {
  if (plan.trials == 0) fail(ErrorCode::invalid_argument, "run_trials: trials must be >= 1");
  TrialsResult result;
  result.traces.resize(plan.trials);

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.trials || failed.load()) return;
      try {
        const std::uint64_t seed = trial_seed(plan.base_seed, i);
        TwinOptions opts = plan.twin;
        opts.seed = seed;
        result.traces[i] = run_twin(problem, trial_twin(data, seed), data.test, schedule, opts);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(plan.threads, 1, plan.trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<TwinTrace> survivors;
  for (const auto& tr : result.traces) {
    if (tr.diverged) {
      ++result.diverged;
    } else {
      survivors.push_back(tr);
    }
  }
  if (survivors.empty()) {
    fail(ErrorCode::all_diverged, "all " + std::to_string(plan.trials) + " trials diverged");
  }
  result.summary = aggregate_trials(survivors);
  return result;
}

}  // namespace aomlab
