#include "aomlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aomlab/error.hpp"

namespace aomlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double saturate(double x) { return std::isfinite(x) ? x : kInf; }

// exp(log_value) with overflow mapped to +inf.
double exp_saturating(double log_value) {
  if (log_value > std::log(std::numeric_limits<double>::max())) return kInf;
  return std::exp(log_value);
}

// log(exp(a) + exp(b)).
double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double one_minus_inv_n(const BoundConstants& k) { return 1.0 - 1.0 / static_cast<double>(k.n); }

void check_horizon(std::int64_t T, std::int64_t t0, std::int64_t min_t0, const char* what) {
  if (!(t0 >= min_t0 && T > t0)) {
    fail(ErrorCode::invalid_argument, std::string(what) + ": need T > t0 >= " + std::to_string(min_t0));
  }
}

}  // namespace

void BoundConstants::validate() const {
  auto bad = [](const char* name, const char* why) {
    fail(ErrorCode::invalid_argument, std::string("bound constant ") + name + ": " + why);
  };
  if (!(mu > 0.0)) bad("mu", "must be positive");
  if (!(L >= 0.0)) bad("L", "must be non-negative");
  if (!(M > 0.0)) bad("M", "must be positive");
  if (!(lambda1 >= 0.0)) bad("lambda1", "must be non-negative");
  if (!(lambda2 >= lambda1)) bad("lambda2", "must be >= lambda1");
  if (!(epsilon > 0.0)) bad("epsilon", "must be positive");
  if (n < 2) bad("n", "must be >= 2");
  if (!(c > 0.0)) bad("c", "must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) bad("alpha", "must lie in (0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) bad("beta", "must lie in (0, 1)");
}

double d2_from_w(double W) {
  const double w2 = W * W + 1.0;
  return std::sqrt(w2) + 0.5 * w2;
}

DerivedConstants derive_constants(const BoundConstants& k, bool b_includes_mu) {
  k.validate();
  const double le = k.lambda1 + k.epsilon;
  const double root = std::sqrt(le);
  const double f = one_minus_inv_n(k);
  DerivedConstants d;
  d.U = f * k.L / root * (1.0 + k.mu * k.mu / le);
  d.V = f * k.mu / (2.0 * root * le);
  d.W = 2.0 * f * k.L * k.mu;
  d.Y = 2.0 * k.mu / root;
  d.Z = 2.0 * k.mu * k.mu;
  d.D1 = d.U * d.U + d.V * d.V;
  d.D2 = d2_from_w(d.W);
  d.A = k.c * std::sqrt(d.D1) + k.alpha * d.D2;
  const double b = (k.c * d.Y + k.alpha * d.Z) *
                   exp_saturating(k.gamma * k.c * k.c * d.D1 / 2.0) / d.A;
  d.B = saturate(b_includes_mu ? b * k.mu : b);
  return d;
}

Matrix2 transition_matrix(std::int64_t t, const BoundConstants& k, const Schedule& schedule) {
  if (t < 1) fail(ErrorCode::invalid_argument, "transition_matrix: t must be >= 1");
  const double eta = schedule.eta_of_t(t);
  const double beta = schedule.beta_of_t(t);
  const double le = k.lambda1 + k.epsilon;
  const double root = std::sqrt(le);
  const double f = one_minus_inv_n(k);
  const double u_t = f * k.L / root * (1.0 + k.mu * k.mu * (1.0 - beta) / le);
  const double v_t = f * k.mu * beta / (2.0 * root * le);
  const double w = 2.0 * f * k.L * k.mu;
  return Matrix2{{{1.0 + eta * u_t, eta * v_t}, {(1.0 - beta) * w, beta}}};
}

double operator_norm_2x2(const Matrix2& m) {
  // sigma_max = sqrt(E^2 + H^2) + sqrt(F^2 + G^2)
  const double e = 0.5 * (m[0][0] + m[1][1]);
  const double f = 0.5 * (m[0][0] - m[1][1]);
  const double g = 0.5 * (m[1][0] + m[0][1]);
  const double h = 0.5 * (m[1][0] - m[0][1]);
  return std::hypot(e, h) + std::hypot(f, g);
}

double norm_bound_lemma3(std::int64_t t, const BoundConstants& k, double alpha_t) {
  if (t < 1) fail(ErrorCode::invalid_argument, "norm_bound_lemma3: t must be >= 1");
  const DerivedConstants d = derive_constants(k);
  const double ct = k.c / static_cast<double>(t);
  return exp_saturating(ct * std::sqrt(d.D1) + ct * ct * d.D1 / 2.0 + alpha_t * d.D2);
}

RecursionBound recursion_bound(const BoundConstants& k, const Schedule& schedule,
                               std::int64_t T, std::int64_t t0, double sigma_init) {
  k.validate();
  check_horizon(T, t0, 0, "recursion_bound");
  const double inv_n = 1.0 / static_cast<double>(k.n);
  const DerivedConstants d = derive_constants(k);

  RecursionBound out;
  out.t0 = t0;
  out.delta.reserve(static_cast<std::size_t>(T - t0 + 1));
  out.sigma.reserve(static_cast<std::size_t>(T - t0 + 1));
  double delta = 0.0;
  double sigma = sigma_init;
  out.delta.push_back(delta);
  out.sigma.push_back(sigma);
  for (std::int64_t t = t0 + 1; t <= T; ++t) {
    const Matrix2 a = transition_matrix(t, k, schedule);
    const double eta = schedule.eta_of_t(t);
    const double beta = schedule.beta_of_t(t);
    const double next_delta = a[0][0] * delta + a[0][1] * sigma + eta * d.Y * inv_n;
    const double next_sigma = a[1][0] * delta + a[1][1] * sigma + (1.0 - beta) * d.Z * inv_n;
    delta = saturate(next_delta);
    sigma = saturate(next_sigma);
    if (std::isinf(delta) || std::isinf(sigma)) out.saturated = true;
    out.delta.push_back(delta);
    out.sigma.push_back(sigma);
  }
  return out;
}

double theorem4_bound(std::int64_t T, std::int64_t t0, const BoundConstants& k,
                      const AlphaSchedule& alpha) {
  if (T == t0 && t0 >= 1) return 0.0;
  check_horizon(T, t0, 1, "theorem4_bound");
  const DerivedConstants d = derive_constants(k);
  const double sqrt_d1 = std::sqrt(d.D1);
  const double Td = static_cast<double>(T);

  // Walk t downwards so the suffix sum of alpha_j for j > t is maintained in O(1).
  double suffix = 0.0;
  double log_sum = -kInf;
  for (std::int64_t t = T; t > t0; --t) {
    const double td = static_cast<double>(t);
    const double additive = k.c * d.Y / td + alpha.at(t) * d.Z;
    if (additive > 0.0) {
      const double term = d.D2 * suffix + k.c * sqrt_d1 * std::log(Td / td) + std::log(additive);
      log_sum = log_add(log_sum, term);
    }
    suffix += alpha.at(t);
  }
  if (log_sum == -kInf) return 0.0;
  const double prefactor = k.gamma * k.c * k.c * d.D1 / 2.0 - std::log(static_cast<double>(k.n));
  return exp_saturating(prefactor + log_sum);
}

double adam_bound_coro(std::int64_t T, std::int64_t t0, double beta, const BoundConstants& k) {
  check_horizon(T, t0, 1, "adam_bound_coro");
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::invalid_argument, "adam_bound_coro: beta must lie in (0, 1)");
  const DerivedConstants d = derive_constants(k);
  const double n = static_cast<double>(k.n);
  const double sqrt_d1 = std::sqrt(d.D1);
  const double Td = static_cast<double>(T);

  double power_sum = 0.0;
  for (std::int64_t t = t0 + 1; t <= T; ++t) {
    power_sum += std::pow(static_cast<double>(t), -k.c * sqrt_d1);
  }
  const double bracket = d.Y / sqrt_d1 + (1.0 - beta) * d.Z * power_sum;
  const double log_second = std::log(k.mu / n) + k.gamma * k.c * k.c * d.D1 / 2.0 +
                            (1.0 - beta) * d.D2 * Td + k.c * sqrt_d1 * std::log(Td) +
                            std::log(bracket);
  return saturate(2.0 * k.M * static_cast<double>(t0) / n + exp_saturating(log_second));
}

double adagrad_cor1_delta(std::int64_t T, std::int64_t t0, const BoundConstants& k) {
  check_horizon(T, t0, 1, "adagrad_bound_cor1");
  const DerivedConstants d = derive_constants(k);
  const double log_value = std::log((k.c * d.Y + k.alpha * d.Z) / static_cast<double>(k.n)) +
                           k.gamma * k.c * k.c * d.D1 / 2.0 +
                           d.A * std::log(static_cast<double>(T) / static_cast<double>(t0)) -
                           std::log(d.A);
  return exp_saturating(log_value);
}

double adagrad_bound_cor1(std::int64_t T, std::int64_t t0, const BoundConstants& k) {
  const double offset = 2.0 * k.M * static_cast<double>(t0) / static_cast<double>(k.n);
  return saturate(offset + k.mu * adagrad_cor1_delta(T, t0, k));
}

Cor2Result adagrad_bound_cor2(double T, const BoundConstants& k, const Cor2Options& options) {
  if (!(T >= 1.0)) fail(ErrorCode::invalid_argument, "adagrad_bound_cor2: T must be >= 1");
  const DerivedConstants d = derive_constants(k, options.b_includes_mu);
  const double A = d.A;
  const double B = d.B;
  const double ratio = A * B / (2.0 * k.M);
  const double growth = A / (A + 1.0);
  const double denom_exp = options.literal_exponent ? A * A / (A + 1.0) : growth;
  Cor2Result r;
  r.t0_star = saturate(std::pow(ratio, 1.0 / (A + 1.0)) * std::pow(T, growth));
  const double bracket = 2.0 * k.M * std::pow(ratio, 1.0 / (A + 1.0)) + B / std::pow(ratio, denom_exp);
  r.bound = saturate(bracket * std::pow(T, growth) / static_cast<double>(k.n));
  return r;
}

AdamWCoefficients adamw_coefficients(const BoundConstants& k, double beta) {
  const double le = k.lambda1 + k.epsilon;
  const double root = std::sqrt(le);
  const double f = one_minus_inv_n(k);
  AdamWCoefficients w;
  w.U = f * k.L / root * (1.0 + k.mu * k.L * (1.0 - beta) / le);
  w.V = f * k.mu * beta / (2.0 * root * le);
  w.W = 2.0 * f * k.L * k.mu;
  w.Y = 2.0 * k.mu / root;
  w.Z = 2.0 * k.mu * k.mu;
  w.n = k.n;
  return w;
}

AdamWRegion adamw_region(const AdamWCoefficients& w, double beta, double eta) {
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::invalid_argument, "adamw_region: beta must lie in (0, 1)");
  if (!(eta > 0.0)) fail(ErrorCode::invalid_argument, "adamw_region: eta must be positive");
  const double w2 = w.W * w.W;
  AdamWRegion r;
  r.beta_threshold = std::max(0.0, (w2 - 1.0) / (w2 + 1.0));
  const double rest = eta * eta * w.V * w.V + (1.0 - beta) * (1.0 - beta) * w2 + beta * beta;
  r.feasible = beta > r.beta_threshold && rest < 1.0;
  if (r.feasible) {
    r.lambda_lo = w.U + (1.0 - std::sqrt(1.0 - rest)) / eta;
    r.lambda_hi = w.U + 1.0 / eta;
  }
  return r;
}

AdamWRegion adamw_region(const BoundConstants& k, double beta, double eta) {
  return adamw_region(adamw_coefficients(k, beta), beta, eta);
}

AdamWFixedPoint adamw_fixed_point(const AdamWCoefficients& w, double beta, double eta,
                                  double lambda, bool literal_b) {
  const double r00 = 1.0 - eta * (lambda - w.U);
  const double r01 = eta * w.V;
  const double r10 = (1.0 - beta) * w.W;
  const double r11 = beta;
  AdamWFixedPoint out;
  out.rho = std::sqrt(r00 * r00 + r01 * r01 + r10 * r10 + r11 * r11);
  out.feasible = out.rho < 1.0;
  if (out.feasible) {
    const double b0 = literal_b ? w.Y : eta * w.Y;
    const double b1 = literal_b ? w.Z : (1.0 - beta) * w.Z;
    out.bound = std::hypot(b0, b1) / (static_cast<double>(w.n) * (1.0 - out.rho));
  }
  return out;
}

AdamWFixedPoint adamw_fixed_point(const BoundConstants& k, double beta, double eta,
                                  double lambda, bool literal_b) {
  return adamw_fixed_point(adamw_coefficients(k, beta), beta, eta, lambda, literal_b);
}

double lemma2_combine(std::int64_t t0, double delta_T, const BoundConstants& k) {
  if (t0 < 1 || t0 > k.n) fail(ErrorCode::invalid_argument, "lemma2_combine: t0 must lie in [1, n]");
  if (!(delta_T >= 0.0)) fail(ErrorCode::invalid_argument, "lemma2_combine: Delta_T must be >= 0");
  return saturate(2.0 * k.M * static_cast<double>(t0) / static_cast<double>(k.n) + k.mu * delta_T);
}

Lemma2Min lemma2_minimize(const BoundConstants& k, const Schedule& schedule, std::int64_t T) {
  const std::int64_t hi = std::min<std::int64_t>(k.n, T - 1);
  if (hi < 1) fail(ErrorCode::invalid_argument, "lemma2_minimize: need T >= 2");
  Lemma2Min best{kInf, 1};
  for (std::int64_t t0 = 1; t0 <= hi; ++t0) {
    const auto rb = recursion_bound(k, schedule, T, t0);
    const double v = lemma2_combine(t0, rb.delta.back(), k);
    if (v < best.value) best = {v, t0};
  }
  return best;
}

ConstantEstimate estimate_constants(const std::vector<TwinTrace>& traces,
                                    const BoundConstants& base) {
  if (traces.empty()) fail(ErrorCode::invalid_argument, "estimate_constants: no traces");
  double mu = 0.0, M = 0.0, L = 0.0;
  double lambda1 = kInf, lambda2 = 0.0;
  std::size_t steps = 0;
  for (const auto& tr : traces) {
    if (!tr.diagnostics) {
      fail(ErrorCode::invalid_argument, "estimate_constants: trace recorded without diagnostics");
    }
    const auto& d = *tr.diagnostics;
    for (double g : d.grad_norm_max) mu = std::max(mu, g);
    for (double l : d.loss_max) M = std::max(M, l);
    for (double s : d.smoothness) L = std::max(L, s);
    for (double v : d.v_min) lambda1 = std::min(lambda1, v);
    for (double v : d.v_max) lambda2 = std::max(lambda2, v);
    steps += d.v_min.size();
  }
  if (steps == 0) fail(ErrorCode::invalid_argument, "estimate_constants: traces contain no steps");

  ConstantEstimate est;
  est.constants = base;
  if (!(mu > 0.0)) {
    est.warnings.push_back("mu: observed gradients are all zero; floored to " + std::to_string(kGradientFloor));
    mu = kGradientFloor;
  }
  if (!(M > 0.0)) {
    est.warnings.push_back("M: observed losses are all zero; floored to " + std::to_string(kGradientFloor));
    M = kGradientFloor;
  }
  if (L < kSmoothnessFloor) {
    est.warnings.push_back("L: no positive smoothness ratio observed; floored to " +
                           std::to_string(kSmoothnessFloor));
    L = kSmoothnessFloor;
  }
  est.constants.mu = mu;
  est.constants.M = M;
  est.constants.L = L;
  est.constants.lambda1 = lambda1;
  est.constants.lambda2 = lambda2;
  return est;
}

double inverse_root_gap(std::span<const double> v, std::span<const double> v_prime, double epsilon) {
  if (v.size() != v_prime.size()) fail(ErrorCode::invalid_argument, "inverse_root_gap: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = 1.0 / std::sqrt(v[i] + epsilon) - 1.0 / std::sqrt(v_prime[i] + epsilon);
    s += d * d;
  }
  return std::sqrt(s);
}

double inverse_root_gap_bound(std::span<const double> v, std::span<const double> v_prime,
                              double lambda1, double epsilon) {
  if (v.size() != v_prime.size()) fail(ErrorCode::invalid_argument, "inverse_root_gap_bound: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - v_prime[i];
    s += d * d;
  }
  const double le = lambda1 + epsilon;
  return std::sqrt(s) / (2.0 * std::sqrt(le) * le);
}

StepCheck check_step_inequalities(const BoundConstants& k, double eta, double beta, bool hit,
                                  double delta, double sigma, double delta_next,
                                  double sigma_next, double weight_decay, double rel_tol) {
  const double le = k.lambda1 + k.epsilon;
  const double root = std::sqrt(le);
  const double carry = std::abs(1.0 - eta * weight_decay) * delta;
  StepCheck c;
  if (hit) {
    c.delta_rhs = carry + eta * 2.0 * k.mu / root;
    c.sigma_rhs = beta * sigma + (1.0 - beta) * 2.0 * k.mu * k.mu;
  } else {
    c.delta_rhs = carry +
                  eta * k.L / root * (1.0 + k.mu * k.mu * (1.0 - beta) / le) * delta +
                  eta * k.mu * beta / (2.0 * root * le) * sigma;
    c.sigma_rhs = beta * sigma + 2.0 * (1.0 - beta) * k.L * k.mu * delta;
  }
  c.delta_ok = delta_next <= c.delta_rhs * (1.0 + rel_tol);
  c.sigma_ok = sigma_next <= c.sigma_rhs * (1.0 + rel_tol);
  return c;
}

}  // namespace aomlab
