#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aomlab/optim.hpp"

namespace aomlab {

enum class Activation { relu, tanh };
enum class LossKind { cross_entropy, mse };

struct MLPSpec {
  int input_dim = 2;
  int hidden_dim = 128;
  int output_dim = 1;
  Activation activation = Activation::relu;
  LossKind loss_kind = LossKind::mse;

  void validate() const;
  // Flattened parameter count: W1, b1, W2, b2.
  std::size_t param_count() const;
  bool operator==(const MLPSpec&) const = default;
};

/// One data point. For classification `target` holds the class index.
struct Example {
  std::vector<double> features;
  double target = 0.0;
  bool operator==(const Example&) const = default;
};

enum class ProblemKind { mlp, pseudo_huber_scalar };

/// A loss f(x; z) together with the shape of x.
struct Problem {
  ProblemKind kind = ProblemKind::mlp;
  MLPSpec spec;
  std::size_t param_dim = 0;

  static Problem mlp(const MLPSpec& spec);
  static Problem pseudo_huber();
  int input_dim() const { return kind == ProblemKind::mlp ? spec.input_dim : 1; }
};

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

/// He-normal weights (variance 2/fan_in), zero biases. Layout, in order:
///   W1 [hidden x input, row-major], b1 [hidden],
///   W2 [output x hidden, row-major], b2 [output].
ParamVector init_params(const MLPSpec& spec, std::uint64_t seed);

// Parameters for any problem; the scalar toy starts from a standard normal draw.
ParamVector init_params(const Problem& problem, std::uint64_t seed);

/// Batch-mean loss and gradient. Throws Error(numeric) naming the example
/// index when the per-example loss or gradient is not finite.
LossGrad loss_and_grad(const Problem& problem, std::span<const double> params,
                       std::span<const Example> batch);

// Batch-mean loss only (forward pass).
double loss_only(const Problem& problem, std::span<const double> params,
                 std::span<const Example> batch);

struct ScalarLossGrad {
  double loss;
  double grad;
};

/// f(x, z) = sqrt(1 + (x - z)^2); |f'| < 1 and f'' <= 1 everywhere.
ScalarLossGrad pseudo_huber_loss(double x, double z);

/// Euclidean distance between two parameter vectors.
double param_distance(std::span<const double> a, std::span<const double> b);

}  // namespace aomlab
