#include "aomlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aomlab/error.hpp"
#include "aomlab/rng.hpp"

namespace aomlab {

void MLPSpec::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
    fail(ErrorCode::invalid_argument, "MLP dimensions must be >= 1");
  }
  if (loss_kind == LossKind::cross_entropy && output_dim < 2) {
    fail(ErrorCode::invalid_argument, "cross_entropy requires output_dim >= 2");
  }
}

std::size_t MLPSpec::param_count() const {
  const auto in = static_cast<std::size_t>(input_dim);
  const auto hid = static_cast<std::size_t>(hidden_dim);
  const auto out = static_cast<std::size_t>(output_dim);
  return hid * in + hid + out * hid + out;
}

Problem Problem::mlp(const MLPSpec& spec) {
  spec.validate();
  Problem p;
  p.kind = ProblemKind::mlp;
  p.spec = spec;
  p.param_dim = spec.param_count();
  return p;
}

Problem Problem::pseudo_huber() {
  Problem p;
  p.kind = ProblemKind::pseudo_huber_scalar;
  p.spec = MLPSpec{1, 1, 1, Activation::relu, LossKind::mse};
  p.param_dim = 1;
  return p;
}

ParamVector init_params(const MLPSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto in = static_cast<std::size_t>(spec.input_dim);
  const auto hid = static_cast<std::size_t>(spec.hidden_dim);
  const auto out = static_cast<std::size_t>(spec.output_dim);
  ParamVector p(spec.param_count(), 0.0);
  Rng rng(seed);

  const double sd1 = std::sqrt(2.0 / static_cast<double>(in));
  for (std::size_t i = 0; i < hid * in; ++i) p[i] = rng.normal(0.0, sd1);

  const std::size_t w2 = hid * in + hid;
  const double sd2 = std::sqrt(2.0 / static_cast<double>(hid));
  for (std::size_t i = 0; i < out * hid; ++i) p[w2 + i] = rng.normal(0.0, sd2);
  return p;
}

ParamVector init_params(const Problem& problem, std::uint64_t seed) {
  if (problem.kind == ProblemKind::mlp) return init_params(problem.spec, seed);
  Rng rng(seed);
  return ParamVector{rng.normal()};
}

ScalarLossGrad pseudo_huber_loss(double x, double z) {
  const double r = x - z;
  const double root = std::sqrt(1.0 + r * r);
  return {root, r / root};
}

double param_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::invalid_argument, "param_distance: dimension mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

void check_dims(const Problem& problem, std::span<const double> params,
                std::span<const Example> batch) {
  if (batch.empty()) fail(ErrorCode::invalid_argument, "loss_and_grad: empty batch");
  if (params.size() != problem.param_dim) {
    fail(ErrorCode::invalid_argument,
         "loss_and_grad: expected " + std::to_string(problem.param_dim) +
             " parameters, got " + std::to_string(params.size()));
  }
  const auto in = static_cast<std::size_t>(problem.input_dim());
  for (std::size_t e = 0; e < batch.size(); ++e) {
    if (batch[e].features.size() != in) {
      fail(ErrorCode::invalid_argument,
           "loss_and_grad: example " + std::to_string(e) + " has " +
               std::to_string(batch[e].features.size()) + " features, expected " +
               std::to_string(in));
    }
  }
}

[[noreturn]] void non_finite(std::size_t index) {
  fail(ErrorCode::numeric, "non-finite loss or gradient at example " + std::to_string(index));
}

// Forward (and optionally backward) pass of the one-hidden-layer network for a
// single example. Accumulates scale * gradient into `grad` when non-null.
class MlpPass {
 public:
  MlpPass(const MLPSpec& spec, std::span<const double> params)
      : spec_(spec),
        params_(params),
        in_(static_cast<std::size_t>(spec.input_dim)),
        hid_(static_cast<std::size_t>(spec.hidden_dim)),
        out_(static_cast<std::size_t>(spec.output_dim)),
        pre_(hid_),
        act_(hid_),
        logits_(out_),
        dout_(out_) {}

  double run(const Example& ex, std::size_t index, double* grad, double scale) {
    const double* w1 = params_.data();
    const double* b1 = w1 + hid_ * in_;
    const double* w2 = b1 + hid_;
    const double* b2 = w2 + out_ * hid_;
    const double* x = ex.features.data();

    for (std::size_t j = 0; j < hid_; ++j) {
      double s = b1[j];
      const double* row = w1 + j * in_;
      for (std::size_t i = 0; i < in_; ++i) s += row[i] * x[i];
      pre_[j] = s;
      act_[j] = spec_.activation == Activation::relu ? std::max(s, 0.0) : std::tanh(s);
    }
    for (std::size_t k = 0; k < out_; ++k) {
      double s = b2[k];
      const double* row = w2 + k * hid_;
      for (std::size_t j = 0; j < hid_; ++j) s += row[j] * act_[j];
      logits_[k] = s;
    }

    double loss;
    if (spec_.loss_kind == LossKind::cross_entropy) {
      const double label_d = ex.target;
      const auto label = static_cast<std::size_t>(label_d);
      if (label_d < 0 || static_cast<double>(label) != label_d || label >= out_) {
        fail(ErrorCode::invalid_argument,
             "example " + std::to_string(index) + " has invalid class label");
      }
      // Off-peak mass kept separate so confident predictions keep their tiny loss.
      const auto p = static_cast<std::size_t>(
          std::max_element(logits_.begin(), logits_.end()) - logits_.begin());
      const double peak = logits_[p];
      double rest = 0.0;
      for (std::size_t k = 0; k < out_; ++k) {
        if (k != p) rest += std::exp(logits_[k] - peak);
      }
      const double log_z = std::log1p(rest);
      loss = (peak - logits_[label]) + log_z;
      for (std::size_t k = 0; k < out_; ++k) {
        if (k == p) {
          dout_[k] = k == label ? -rest / (1.0 + rest) : 1.0 / (1.0 + rest);
        } else {
          dout_[k] = std::exp(logits_[k] - peak - log_z) - (k == label ? 1.0 : 0.0);
        }
      }
    } else {
      loss = 0.0;
      const double inv = 1.0 / static_cast<double>(out_);
      for (std::size_t k = 0; k < out_; ++k) {
        const double r = logits_[k] - ex.target;
        loss += r * r * inv;
        dout_[k] = 2.0 * r * inv;
      }
    }
    if (!std::isfinite(loss)) non_finite(index);
    if (grad == nullptr) return loss;

    double* gw1 = grad;
    double* gb1 = gw1 + hid_ * in_;
    double* gw2 = gb1 + hid_;
    double* gb2 = gw2 + out_ * hid_;
    for (std::size_t k = 0; k < out_; ++k) {
      const double d = scale * dout_[k];
      if (!std::isfinite(d)) non_finite(index);
      gb2[k] += d;
      double* grow = gw2 + k * hid_;
      for (std::size_t j = 0; j < hid_; ++j) grow[j] += d * act_[j];
    }
    for (std::size_t j = 0; j < hid_; ++j) {
      double dh = 0.0;
      for (std::size_t k = 0; k < out_; ++k) dh += dout_[k] * w2[k * hid_ + j];
      const double deriv = spec_.activation == Activation::relu
                               ? (pre_[j] > 0.0 ? 1.0 : 0.0)
                               : 1.0 - act_[j] * act_[j];
      const double dpre = scale * dh * deriv;
      if (!std::isfinite(dpre)) non_finite(index);
      if (dpre == 0.0) continue;
      gb1[j] += dpre;
      double* grow = gw1 + j * in_;
      for (std::size_t i = 0; i < in_; ++i) grow[i] += dpre * x[i];
    }
    return loss;
  }

 private:
  const MLPSpec& spec_;
  std::span<const double> params_;
  std::size_t in_, hid_, out_;
  std::vector<double> pre_, act_, logits_, dout_;
};

}  // namespace

LossGrad loss_and_grad(const Problem& problem, std::span<const double> params,
                       std::span<const Example> batch) {
  check_dims(problem, params, batch);
  LossGrad out;
  out.grad.assign(problem.param_dim, 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());

  if (problem.kind == ProblemKind::pseudo_huber_scalar) {
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const auto r = pseudo_huber_loss(params[0], batch[e].features[0]);
      if (!std::isfinite(r.loss) || !std::isfinite(r.grad)) non_finite(e);
      out.loss += scale * r.loss;
      out.grad[0] += scale * r.grad;
    }
    return out;
  }

  MlpPass pass(problem.spec, params);
  for (std::size_t e = 0; e < batch.size(); ++e) {
    out.loss += scale * pass.run(batch[e], e, out.grad.data(), scale);
  }
  return out;
}

double loss_only(const Problem& problem, std::span<const double> params,
                 std::span<const Example> batch) {
  check_dims(problem, params, batch);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  if (problem.kind == ProblemKind::pseudo_huber_scalar) {
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const double l = pseudo_huber_loss(params[0], batch[e].features[0]).loss;
      if (!std::isfinite(l)) non_finite(e);
      loss += scale * l;
    }
    return loss;
  }
  MlpPass pass(problem.spec, params);
  for (std::size_t e = 0; e < batch.size(); ++e) {
    loss += scale * pass.run(batch[e], e, nullptr, 0.0);
  }
  return loss;
}

}  // namespace aomlab
