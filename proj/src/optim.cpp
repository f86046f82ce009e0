#include "aomlab/optim.hpp"

#include <cmath>

#include "aomlab/error.hpp"

namespace aomlab {

OptState OptState::fresh(ParamVector x0, double v0) {
  if (!(v0 >= 0.0) || !std::isfinite(v0)) fail(ErrorCode::invalid_argument, "v0 must be finite and >= 0");
  OptState s;
  const auto n = x0.size();
  s.x = std::move(x0);
  s.m.assign(n, 0.0);
  s.v.assign(n, v0);
  return s;
}

double Schedule::alpha_of_t(std::int64_t) const { return momentum; }

double Schedule::beta_of_t(std::int64_t t) const {
  if (beta_rule == BetaRule::constant) return beta;
  return 1.0 - harmonic_rate / static_cast<double>(t);
}

double Schedule::eta_of_t(std::int64_t t) const {
  const auto td = static_cast<double>(t);
  switch (step_rule) {
    case StepRule::constant: return lr;
    case StepRule::inverse_t: return lr / td;
  }
  return lr;
}

void Schedule::validate() const {
  auto bad = [](const char* name, const char* why) {
    fail(ErrorCode::invalid_argument, std::string(name) + ": " + why);
  };
  if (!(momentum >= 0.0 && momentum < 1.0)) bad("beta1", "must lie in [0, 1)");
  if (beta_rule == BetaRule::constant) {
    if (!(beta > 0.0 && beta <= 1.0)) bad("beta2", "must lie in (0, 1]");
  } else if (!(harmonic_rate > 0.0 && harmonic_rate <= 1.0)) {
    // beta_1 = 1 - a must not be negative.
    bad("alpha", "must lie in (0, 1]");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) bad("lr", "must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) bad("epsilon", "must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    bad("weight_decay", "must be non-negative");
  }
}

namespace {

double require(const ParamMap& params, const char* name) {
  auto it = params.find(name);
  if (it == params.end()) {
    fail(ErrorCode::invalid_argument, std::string("missing parameter '") + name + "'");
  }
  return it->second;
}

double optional(const ParamMap& params, const char* name, double fallback) {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

Schedule make_schedule(Preset preset, const ParamMap& params, StepRule step_rule) {
  Schedule s;
  s.step_rule = step_rule;
  s.lr = require(params, "lr");
  s.epsilon = require(params, "epsilon");
  s.weight_decay = optional(params, "weight_decay", 0.0);
  switch (preset) {
    case Preset::adam:
      s.momentum = require(params, "beta1");
      s.beta_rule = BetaRule::constant;
      s.beta = require(params, "beta2");
      break;
    case Preset::adagrad:
      s.momentum = 0.0;
      s.beta_rule = BetaRule::harmonic;
      s.harmonic_rate = require(params, "alpha");
      break;
    case Preset::constant_sgd_like:
      s.momentum = 0.0;
      s.beta_rule = BetaRule::constant;
      s.beta = 1.0;
      break;
    case Preset::custom:
      s.momentum = require(params, "beta1");
      if (params.count("beta2") && params.count("alpha")) {
        fail(ErrorCode::invalid_argument, "custom preset takes either 'beta2' or 'alpha', not both");
      }
      if (params.count("alpha")) {
        s.beta_rule = BetaRule::harmonic;
        s.harmonic_rate = params.at("alpha");
      } else {
        s.beta_rule = BetaRule::constant;
        s.beta = require(params, "beta2");
      }
      break;
  }
  s.validate();
  return s;
}

void aom_step_inplace(OptState& state, std::span<const double> grad,
                      const Schedule& schedule) {
  const std::size_t d = state.x.size();
  if (grad.size() != d || state.m.size() != d || state.v.size() != d) {
    fail(ErrorCode::invalid_argument,
         "aom_step: dimension mismatch (x has " + std::to_string(d) +
             ", gradient has " + std::to_string(grad.size()) + ")");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(grad[i])) {
      fail(ErrorCode::numeric,
           "aom_step: non-finite gradient at coordinate " + std::to_string(i));
    }
  }

  const std::int64_t t = state.t + 1;
  const double alpha = schedule.alpha_of_t(t);
  const double beta = schedule.beta_of_t(t);
  const double eta = schedule.eta_of_t(t);
  const double shrink = 1.0 - eta * schedule.weight_decay;
  const double eps = schedule.epsilon;

  for (std::size_t i = 0; i < d; ++i) {
    const double g = grad[i];
    const double m = alpha * state.m[i] + (1.0 - alpha) * g;
    const double v = beta * state.v[i] + (1.0 - beta) * (g * g);
    state.m[i] = m;
    state.v[i] = v;
    state.x[i] = shrink * state.x[i] - eta * m / std::sqrt(v + eps);
  }
  state.t = t;
}

OptState aom_step(const OptState& state, std::span<const double> grad,
                  const Schedule& schedule) {
  OptState next = state;
  aom_step_inplace(next, grad, schedule);
  return next;
}

const char* preset_name(Preset preset) {
  switch (preset) {
    case Preset::adam: return "adam";
    case Preset::adagrad: return "adagrad";
    case Preset::constant_sgd_like: return "constant_sgd_like";
    case Preset::custom: return "custom";
  }
  return "?";
}

Preset parse_preset(const std::string& name) {
  if (name == "adam") return Preset::adam;
  if (name == "adagrad") return Preset::adagrad;
  if (name == "constant_sgd_like") return Preset::constant_sgd_like;
  if (name == "custom") return Preset::custom;
  fail(ErrorCode::invalid_argument, "unknown optimizer preset '" + name + "'");
}

const char* step_rule_name(StepRule rule) {
  switch (rule) {
    case StepRule::constant: return "constant";
    case StepRule::inverse_t: return "inv_t";
  }
  return "?";
}

StepRule parse_step_rule(const std::string& name) {
  if (name == "constant") return StepRule::constant;
  if (name == "inv_t") return StepRule::inverse_t;
  fail(ErrorCode::invalid_argument, "unknown lr_schedule '" + name + "'");
}

}  // namespace aomlab
