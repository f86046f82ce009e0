#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace aomlab {

using ParamVector = std::vector<double>;

/// Optimizer state: parameters, first and second moment accumulators and the
/// number of updates applied so far.
struct OptState {
  ParamVector x;
  ParamVector m;
  ParamVector v;  // elementwise >= 0
  std::int64_t t = 0;

  static OptState fresh(ParamVector x0, double v0 = 0.0);
  bool operator==(const OptState&) const = default;
};

enum class Preset { adam, adagrad, constant_sgd_like, custom };
enum class BetaRule { constant, harmonic };  // beta, or 1 - a/t
enum class StepRule { constant, inverse_t };  // c, c/t

/// Coefficient schedules of the adaptive update, evaluated lazily at the
/// 1-based index of the step being taken.
struct Schedule {
  double momentum = 0.0;  // alpha_t, held constant
  BetaRule beta_rule = BetaRule::constant;
  double beta = 0.999;
  double harmonic_rate = 1.0;  // a in beta_t = 1 - a/t
  StepRule step_rule = StepRule::constant;
  double lr = 1e-3;  // eta for constant steps, c otherwise
  double epsilon = 1e-8;
  double weight_decay = 0.0;

  double alpha_of_t(std::int64_t t) const;
  double beta_of_t(std::int64_t t) const;
  double eta_of_t(std::int64_t t) const;

  // Throws Error(invalid_argument) naming the offending field.
  void validate() const;

  bool operator==(const Schedule&) const = default;
};

using ParamMap = std::map<std::string, double>;

/// Builds a schedule from a named preset.
///   adam:              beta1, beta2, lr, epsilon      (alpha_t = beta1, beta_t = beta2)
///   adagrad:           alpha, lr, epsilon             (alpha_t = 0, beta_t = 1 - alpha/t)
///   constant_sgd_like: lr, epsilon                    (alpha_t = 0, beta_t = 1)
///   custom:            beta1, lr, epsilon and either beta2 or alpha
/// `weight_decay` is optional for every preset.
Schedule make_schedule(Preset preset, const ParamMap& params,
                       StepRule step_rule = StepRule::constant);

/// One update of the adaptive family:
///   m' = a m + (1 - a) g
///   v' = b v + (1 - b) g^2
///   x' = (1 - eta*lambda) x - eta m' / sqrt(v' + eps)
/// with coefficients taken at step index state.t + 1. No bias correction.
OptState aom_step(const OptState& state, std::span<const double> grad,
                  const Schedule& schedule);

// Same update applied in place; `state` is untouched if an error is thrown.
void aom_step_inplace(OptState& state, std::span<const double> grad,
                      const Schedule& schedule);

const char* preset_name(Preset preset);
Preset parse_preset(const std::string& name);
const char* step_rule_name(StepRule rule);
StepRule parse_step_rule(const std::string& name);

}  // namespace aomlab
