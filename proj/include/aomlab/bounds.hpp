#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "aomlab/optim.hpp"
#include "aomlab/stability.hpp"

namespace aomlab {

inline constexpr double kBasel = std::numbers::pi * std::numbers::pi / 6.0;

/// Problem and schedule constants the stability bounds are stated in.
///   mu      sup |grad f|             L        Lipschitz constant of grad f
///   M       sup f                    lambda1  lower bound on every v coordinate
///   lambda2 upper bound on v         epsilon  denominator stabilizer
///   n       sample size              c        step-size scale, eta_t = c/t
///   alpha   harmonic rate, alpha_t <= alpha/t
///   beta    fixed second-moment coefficient
struct BoundConstants {
  double mu = 1.0;
  double L = 1.0;
  double M = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 1.0;
  double epsilon = 1.0;
  int n = 2;
  double c = 1.0;
  double alpha = 1.0;
  double beta = 0.999;
  double gamma = kBasel;

  void validate() const;
};

struct DerivedConstants {
  double U = 0, V = 0, W = 0, Y = 0, Z = 0;
  double D1 = 0, D2 = 0;
  double A = 0, B = 0;
};

/// B carries the factor mu by default; `b_includes_mu = false` gives the
/// variant without it.
DerivedConstants derive_constants(const BoundConstants& k, bool b_includes_mu = true);

double d2_from_w(double W);

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// A_t = [[1 + eta_t U_t, eta_t V_t], [(1 - beta_t) W, beta_t]] with U_t, V_t
/// evaluated at beta_t. Coefficients come from `schedule` (eta_t, beta_t).
Matrix2 transition_matrix(std::int64_t t, const BoundConstants& k, const Schedule& schedule);

/// Largest singular value, closed form.
double operator_norm_2x2(const Matrix2& m);

/// exp(c/t sqrt(D1) + c^2/t^2 D1/2 + alpha_t D2).
double norm_bound_lemma3(std::int64_t t, const BoundConstants& k, double alpha_t);

struct RecursionBound {
  std::int64_t t0 = 0;
  std::vector<double> delta;  // delta[j] bounds Delta at step t0 + j
  std::vector<double> sigma;
  bool saturated = false;     // some entry overflowed to +inf
};

/// Iterates the coupled difference inequalities as equalities from
/// (Delta, Sigma) = (0, sigma_init) at step t0 up to step T. Step t uses
/// eta_t and beta_t (1-based, the same indexing as aom_step):
///   Delta_t = (1 + eta_t U_t) Delta_{t-1} + eta_t V_t Sigma_{t-1} + eta_t Y/n
///   Sigma_t = beta_t Sigma_{t-1} + (1-beta_t) W Delta_{t-1} + (1-beta_t) Z/n
RecursionBound recursion_bound(const BoundConstants& k, const Schedule& schedule,
                               std::int64_t T, std::int64_t t0, double sigma_init = 0.0);

/// alpha_t = 1 - beta_t, either alpha/t or a constant.
struct AlphaSchedule {
  enum class Kind { harmonic, constant } kind = Kind::harmonic;
  double value = 1.0;

  static AlphaSchedule harmonic(double alpha) { return {Kind::harmonic, alpha}; }
  static AlphaSchedule constant(double a) { return {Kind::constant, a}; }
  double at(std::int64_t t) const {
    return kind == Kind::harmonic ? value / static_cast<double>(t) : value;
  }
};

/// (1/n) exp(gamma c^2 D1/2) sum_{t=t0+1}^{T} exp(D2 sum_{j=t+1}^{T} alpha_j)
///   (T/t)^{c sqrt(D1)} (cY/t + alpha_t Z); +inf when it overflows.
double theorem4_bound(std::int64_t T, std::int64_t t0, const BoundConstants& k,
                      const AlphaSchedule& alpha);

/// Fixed beta, eta_t = c/t:
///   2M t0/n + (mu/n) exp(gamma c^2 D1/2 + (1-beta) D2 T) T^{c sqrt(D1)}
///     (Y/sqrt(D1) + (1-beta) Z sum_{t=t0+1}^{T} t^{-c sqrt(D1)}).
double adam_bound_coro(std::int64_t T, std::int64_t t0, double beta, const BoundConstants& k);

/// Delta-level part of the harmonic closed form:
///   (1/n)(cY + alpha Z) exp(gamma c^2 D1/2) T^A / (A t0^A),  A = c sqrt(D1) + alpha D2.
double adagrad_cor1_delta(std::int64_t T, std::int64_t t0, const BoundConstants& k);

/// 2M t0/n + mu * adagrad_cor1_delta(T, t0, k).
double adagrad_bound_cor1(std::int64_t T, std::int64_t t0, const BoundConstants& k);

struct Cor2Options {
  bool b_includes_mu = true;
  // Use the exponent A^2/(A+1) on the second term's denominator as printed
  // instead of A/(A+1), which is what substituting t0* gives.
  bool literal_exponent = false;
};

struct Cor2Result {
  double bound = 0.0;
  double t0_star = 0.0;
};

/// The harmonic-schedule bound minimized over t0:
///   t0* = (AB/2M)^{1/(A+1)} T^{A/(A+1)},
///   bound = (1/n)[2M (AB/2M)^{1/(A+1)} + B / (AB/2M)^{A/(A+1)}] T^{A/(A+1)}.
Cor2Result adagrad_bound_cor2(double T, const BoundConstants& k, const Cor2Options& options = {});

/// Coefficients of the weight-decay system at fixed beta:
///   U = (1-1/n) L/sqrt(l1+e) [1 + mu L (1-beta)/(l1+e)]
///   V = (1-1/n) mu beta / (2 sqrt(l1+e)(l1+e)),  W = 2(1-1/n) L mu,
///   Y = 2 mu/sqrt(l1+e),  Z = 2 mu^2.
struct AdamWCoefficients {
  double U = 0, V = 0, W = 0, Y = 0, Z = 0;
  int n = 2;
};

AdamWCoefficients adamw_coefficients(const BoundConstants& k, double beta);

struct AdamWRegion {
  double beta_threshold = 0.0;
  bool feasible = false;
  double lambda_lo = 0.0;  // open interval (lo, hi), meaningful when feasible
  double lambda_hi = 0.0;
};

AdamWRegion adamw_region(const BoundConstants& k, double beta, double eta);
AdamWRegion adamw_region(const AdamWCoefficients& w, double beta, double eta);

struct AdamWFixedPoint {
  double rho = 0.0;    // Frobenius norm of R
  bool feasible = false;
  double bound = 0.0;  // |b| / (n (1 - rho)) when feasible
};

/// R = [[1 - eta(lambda - U), eta V], [(1-beta) W, beta]], b = (eta Y, (1-beta) Z),
/// or b = (Y, Z) when `literal_b` is set.
AdamWFixedPoint adamw_fixed_point(const AdamWCoefficients& w, double beta, double eta,
                                  double lambda, bool literal_b = false);
AdamWFixedPoint adamw_fixed_point(const BoundConstants& k, double beta, double eta,
                                  double lambda, bool literal_b = false);

/// 2M t0/n + mu Delta_T.
double lemma2_combine(std::int64_t t0, double delta_T, const BoundConstants& k);

struct Lemma2Min {
  double value = 0.0;
  std::int64_t t0 = 1;
};

/// min over integer t0 in [1, min(n, T-1)] of lemma2_combine(t0, recursion(T; t0)).
Lemma2Min lemma2_minimize(const BoundConstants& k, const Schedule& schedule, std::int64_t T);

struct ConstantEstimate {
  BoundConstants constants;
  std::vector<std::string> warnings;
};

inline constexpr double kSmoothnessFloor = 1e-6;
inline constexpr double kGradientFloor = 1e-12;

/// Empirical mu, L, M, lambda1, lambda2 from traces recorded with diagnostics;
/// the remaining fields are copied from `base`.
ConstantEstimate estimate_constants(const std::vector<TwinTrace>& traces,
                                    const BoundConstants& base);

/// |1/sqrt(v+e) - 1/sqrt(v'+e)|_2.
double inverse_root_gap(std::span<const double> v, std::span<const double> v_prime, double epsilon);

/// |v - v'|_2 / (2 sqrt(l1+e) (l1+e)); dominates inverse_root_gap when all
/// coordinates are >= lambda1.
double inverse_root_gap_bound(std::span<const double> v, std::span<const double> v_prime,
                              double lambda1, double epsilon);

/// Single-realization form of the difference inequalities for one batch-1
/// step. `hit` selects the branch where the differing example was drawn.
struct StepCheck {
  double delta_rhs = 0.0;
  double sigma_rhs = 0.0;
  bool delta_ok = false;
  bool sigma_ok = false;
};

StepCheck check_step_inequalities(const BoundConstants& k, double eta, double beta, bool hit,
                                  double delta, double sigma, double delta_next,
                                  double sigma_next, double weight_decay = 0.0,
                                  double rel_tol = 1e-12);

}  // namespace aomlab
