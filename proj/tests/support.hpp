#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "aomlab/model.hpp"
#include "aomlab/rng.hpp"

namespace aomlab::testing {

/// Central-difference gradient of the batch loss.
inline std::vector<double> finite_difference_grad(const Problem& problem,
                                                  const std::vector<double>& params,
                                                  std::span<const Example> batch,
                                                  double h = 1e-5) {
  std::vector<double> p = params;
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double up = loss_only(problem, p, batch);
    p[i] = orig - h;
    const double down = loss_only(problem, p, batch);
    p[i] = orig;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

/// |g - g_fd| / max(|g|, |g_fd|), norms over the whole vector.
inline double gradient_relative_error(const Problem& problem, const std::vector<double>& params,
                                      std::span<const Example> batch) {
  const auto analytic = loss_and_grad(problem, params, batch).grad;
  const auto numeric = finite_difference_grad(problem, params, batch);
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
  return std::sqrt(diff) / scale;
}

/// Random batch for a problem: standard normal features, class labels for
/// cross-entropy, normal targets otherwise.
inline std::vector<Example> random_batch(const Problem& problem, Rng& rng, std::size_t size) {
  std::vector<Example> batch(size);
  for (auto& ex : batch) {
    ex.features.resize(static_cast<std::size_t>(problem.input_dim()));
    for (double& f : ex.features) f = rng.normal(0.0, 2.0);
    if (problem.kind == ProblemKind::mlp && problem.spec.loss_kind == LossKind::cross_entropy) {
      ex.target = static_cast<double>(rng.below(static_cast<std::uint64_t>(problem.spec.output_dim)));
    } else {
      ex.target = rng.normal();
    }
  }
  return batch;
}

/// True when a central-difference stencil of half-width h around `params`
/// would cross a ReLU kink: moving one first-layer weight or bias by h shifts
/// a pre-activation by at most h * max(1, |x|).
inline bool stencil_crosses_kink(const Problem& problem, const std::vector<double>& params,
                                 std::span<const Example> batch, double h = 1e-5) {
  if (problem.kind != ProblemKind::mlp || problem.spec.activation != Activation::relu) return false;
  const auto in = static_cast<std::size_t>(problem.spec.input_dim);
  const auto hidden = static_cast<std::size_t>(problem.spec.hidden_dim);
  for (const auto& ex : batch) {
    double reach = 1.0;
    for (double f : ex.features) reach = std::max(reach, std::abs(f));
    for (std::size_t j = 0; j < hidden; ++j) {
      double z = params[hidden * in + j];
      for (std::size_t k = 0; k < in; ++k) z += params[j * in + k] * ex.features[k];
      if (std::abs(z) <= 2.0 * h * reach) return true;
    }
  }
  return false;
}

struct GradientCheck {
  double worst = 0.0;
  int resampled = 0;  // draws rejected because the stencil straddled a kink
};

/// Worst gradient-check error over `points` random (params, batch) draws.
/// Batches come from `pool` when it is non-empty, else from random_batch.
inline GradientCheck gradient_check(const Problem& problem, std::uint64_t seed, int points,
                                    const std::vector<Example>& pool = {}) {
  Rng rng(seed);
  GradientCheck out;
  for (int k = 0; k < points;) {
    std::vector<double> params = init_params(problem, rng.next_u64());
    if (problem.kind == ProblemKind::mlp) {
      // Nonzero biases so that every code path is exercised.
      for (double& p : params) p += rng.normal(0.0, 0.1);
    } else {
      params[0] = rng.normal(0.0, 3.0);
    }
    const std::size_t size = 1 + rng.below(5);
    std::vector<Example> batch;
    if (pool.empty()) {
      batch = random_batch(problem, rng, size);
    } else {
      for (std::size_t b = 0; b < size; ++b) batch.push_back(pool[rng.below(pool.size())]);
    }
    if (stencil_crosses_kink(problem, params, batch)) {
      ++out.resampled;
      continue;
    }
    out.worst = std::max(out.worst, gradient_relative_error(problem, params, batch));
    ++k;
  }
  return out;
}

inline double worst_gradient_error(const Problem& problem, std::uint64_t seed, int points) {
  return gradient_check(problem, seed, points).worst;
}

}  // namespace aomlab::testing

#include "aomlab/bounds.hpp"

namespace aomlab::testing {

/// Random constants in a range where the bounds stay mostly finite.
inline BoundConstants random_constants(Rng& rng) {
  BoundConstants k;
  k.mu = rng.uniform(0.1, 2.0);
  k.L = rng.uniform(0.05, 2.0);
  k.M = rng.uniform(0.5, 5.0);
  k.lambda1 = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 2.0);
  k.lambda2 = k.lambda1 + rng.uniform(0.0, 3.0);
  k.epsilon = std::exp(rng.uniform(std::log(0.05), std::log(2.0)));
  k.n = 2 + static_cast<int>(rng.below(300));
  k.c = rng.uniform(0.01, 1.0);
  k.alpha = rng.uniform(0.01, 1.0);
  k.beta = rng.uniform(0.01, 0.999);
  return k;
}

/// Adagrad-type schedule matching the constants: eta_t = c/t, beta_t = 1 - alpha/t.
inline Schedule harmonic_schedule(const BoundConstants& k) {
  return make_schedule(Preset::adagrad, {{"alpha", k.alpha}, {"lr", k.c}, {"epsilon", k.epsilon}},
                       StepRule::inverse_t);
}

/// Largest singular value from the larger eigenvalue of M^T M.
inline double spectral_norm_oracle(const Matrix2& m) {
  using ld = long double;
  const ld a = m[0][0], b = m[0][1], c = m[1][0], d = m[1][1];
  const ld p = a * a + c * c, q = a * b + c * d, r = b * b + d * d;
  const ld tr = p + r;
  const ld disc = std::sqrt((p - r) * (p - r) + 4 * q * q);
  return static_cast<double>(std::sqrt((tr + disc) / 2));
}

}  // namespace aomlab::testing
