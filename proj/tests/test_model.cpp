#include <cmath>
#include <numbers>
#include <vector>

#include "aomlab/error.hpp"
#include "aomlab/model.hpp"
#include "aomlab/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aomlab;

TEST_CASE("init_params is deterministic with zero biases and documented layout") {
  const MLPSpec spec{2, 7, 3, Activation::relu, LossKind::cross_entropy};
  const auto a = init_params(spec, 99);
  const auto b = init_params(spec, 99);
  CHECK(a == b);
  CHECK(a != init_params(spec, 100));
  REQUIRE(a.size() == 7 * 2 + 7 + 3 * 7 + 3);
  for (std::size_t i = 14; i < 21; ++i) CHECK(a[i] == 0.0);  // b1
  for (std::size_t i = 42; i < 45; ++i) CHECK(a[i] == 0.0);  // b2
}

TEST_CASE("He variance of the first layer") {
  const MLPSpec spec{2, 10000, 1, Activation::relu, LossKind::mse};
  const auto p = init_params(spec, 5);
  double sum = 0.0, sq = 0.0;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) sum += p[i];
  const double mean = sum / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) sq += (p[i] - mean) * (p[i] - mean);
  const double var = sq / static_cast<double>(n - 1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("mse at the zero network") {
  const Problem p = Problem::mlp({2, 4, 1, Activation::relu, LossKind::mse});
  const std::vector<double> zeros(p.param_dim, 0.0);
  const std::vector<Example> batch = {{{0.3, -1.2}, 0.0}, {{2.0, 0.5}, 0.0}};
  const auto r = loss_and_grad(p, zeros, batch);
  CHECK(r.loss == 0.0);
  for (double g : r.grad) CHECK(g == 0.0);
}

TEST_CASE("cross entropy with identical logits is ln 3") {
  const Problem p = Problem::mlp({2, 4, 3, Activation::tanh, LossKind::cross_entropy});
  std::vector<double> params(p.param_dim, 0.0);
  // Same first-layer weights and identical output rows give identical logits.
  for (std::size_t i = 0; i < 8; ++i) params[i] = 0.1 * static_cast<double>(i);
  for (std::size_t i = 12; i < 24; ++i) params[i] = 0.5;
  const std::vector<Example> batch = {{{1.0, 2.0}, 0.0}, {{-1.0, 0.5}, 2.0}};
  CHECK(loss_only(p, params, batch) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(std::log(3.0) == doctest::Approx(1.098612).epsilon(1e-6));
}

TEST_CASE("cross entropy is stable for large logits") {
  const Problem p = Problem::mlp({1, 1, 2, Activation::relu, LossKind::cross_entropy});
  // W1 = 1, b1 = 0, W2 = (1000, -1000), b2 = 0: logits (1000x, -1000x).
  const std::vector<double> params = {1.0, 0.0, 1000.0, -1000.0, 0.0, 0.0};
  const std::vector<Example> right = {{{1.0}, 0.0}};
  const std::vector<Example> wrong = {{{1.0}, 1.0}};
  CHECK(loss_only(p, params, right) == doctest::Approx(0.0));
  CHECK(loss_only(p, params, wrong) == doctest::Approx(2000.0));
  const auto r = loss_and_grad(p, params, wrong);
  for (double g : r.grad) CHECK(std::isfinite(g));
}

TEST_CASE("cross entropy keeps precision at a confident margin") {
  const Problem p = Problem::mlp({1, 1, 2, Activation::relu, LossKind::cross_entropy});
  // Logit margin 40: loss is log(1 + e^-40), far below one ulp of 1.
  const std::vector<double> params = {1.0, 0.0, 20.0, -20.0, 0.0, 0.0};
  const std::vector<Example> right = {{{1.0}, 0.0}};
  const double expected = std::log1p(std::exp(-40.0));
  const auto r = loss_and_grad(p, params, right);
  CHECK(r.loss == doctest::Approx(expected).epsilon(1e-12));
  // d loss / d b2 = softmax - onehot = (-s, s) / (1 + s) with s = e^-40.
  const double s = std::exp(-40.0);
  CHECK(r.grad[4] == doctest::Approx(-s / (1.0 + s)).epsilon(1e-12));
  CHECK(r.grad[5] == doctest::Approx(s / (1.0 + s)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences") {
  using testing::worst_gradient_error;
  const Problem cls = Problem::mlp({2, 16, 3, Activation::relu, LossKind::cross_entropy});
  const Problem reg = Problem::mlp({2, 16, 1, Activation::relu, LossKind::mse});
  const Problem cls_tanh = Problem::mlp({2, 8, 4, Activation::tanh, LossKind::cross_entropy});
  const Problem reg_tanh = Problem::mlp({3, 8, 2, Activation::tanh, LossKind::mse});
  const Problem toy = Problem::pseudo_huber();
  CHECK(worst_gradient_error(cls, 1, 30) < 1e-4);
  CHECK(worst_gradient_error(reg, 2, 30) < 1e-4);
  CHECK(worst_gradient_error(cls_tanh, 3, 30) < 1e-4);
  CHECK(worst_gradient_error(reg_tanh, 4, 30) < 1e-4);
  CHECK(worst_gradient_error(toy, 5, 100) < 1e-4);
}

TEST_CASE("batch loss and gradient are the means of per-example values") {
  const Problem p = Problem::mlp({2, 5, 3, Activation::relu, LossKind::cross_entropy});
  Rng rng(8);
  const auto params = init_params(p.spec, 1);
  const auto batch = testing::random_batch(p, rng, 4);
  const auto all = loss_and_grad(p, params, batch);
  double loss = 0.0;
  std::vector<double> grad(p.param_dim, 0.0);
  for (const auto& ex : batch) {
    const auto one = loss_and_grad(p, params, std::span<const Example>(&ex, 1));
    loss += one.loss / 4.0;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += one.grad[i] / 4.0;
  }
  CHECK(all.loss == doctest::Approx(loss).epsilon(1e-14));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    CHECK(all.grad[i] == doctest::Approx(grad[i]).epsilon(1e-12));
  }
}

TEST_CASE("non-finite results name the offending example") {
  const Problem p = Problem::mlp({2, 3, 1, Activation::relu, LossKind::mse});
  const auto params = init_params(p.spec, 3);
  const std::vector<Example> batch = {{{0.1, 0.2}, 0.0}, {{1e300, 1e300}, 0.0}};
  try {
    loss_and_grad(p, params, batch);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numeric);
    CHECK(std::string(e.what()).find("example 1") != std::string::npos);
  }
}

TEST_CASE("input validation") {
  const Problem p = Problem::mlp({2, 3, 3, Activation::relu, LossKind::cross_entropy});
  const auto params = init_params(p.spec, 3);
  CHECK_THROWS_AS(loss_and_grad(p, params, std::vector<Example>{}), Error);
  CHECK_THROWS_AS(loss_and_grad(p, std::vector<double>(3, 0.0), std::vector<Example>{{{1, 2}, 0}}),
                  Error);
  CHECK_THROWS_AS(loss_and_grad(p, params, std::vector<Example>{{{1, 2}, 3.0}}), Error);
  CHECK_THROWS_AS(loss_and_grad(p, params, std::vector<Example>{{{1, 2}, 0.5}}), Error);
  CHECK_THROWS_AS(Problem::mlp({2, 3, 1, Activation::relu, LossKind::cross_entropy}), Error);
  CHECK_THROWS_AS(Problem::mlp({0, 3, 2, Activation::relu, LossKind::mse}), Error);
}

TEST_CASE("pseudo-Huber values and constants") {
  auto at = pseudo_huber_loss(0.7, 0.7);
  CHECK(at.loss == 1.0);
  CHECK(at.grad == 0.0);
  auto one = pseudo_huber_loss(2.0, 1.0);
  CHECK(one.loss == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  CHECK(one.grad == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-15));

  Rng rng(17);
  for (int i = 0; i < 1000000; ++i) {
    const double x = rng.normal(0.0, 100.0), z = rng.normal(0.0, 100.0);
    REQUIRE(std::abs(pseudo_huber_loss(x, z).grad) < 1.0);
  }
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.normal(0.0, 5.0), y = rng.normal(0.0, 5.0), z = rng.normal(0.0, 5.0);
    const auto fx = pseudo_huber_loss(x, z), fy = pseudo_huber_loss(y, z);
    REQUIRE(std::abs(fx.loss - fy.loss) <= std::abs(x - y) * (1 + 1e-12));
    REQUIRE(std::abs(fx.grad - fy.grad) <= std::abs(x - y) * (1 + 1e-12));
  }
}

TEST_CASE("losses are nonnegative") {
  Rng rng(23);
  const Problem cls = Problem::mlp({2, 6, 3, Activation::relu, LossKind::cross_entropy});
  const Problem reg = Problem::mlp({2, 6, 1, Activation::tanh, LossKind::mse});
  for (int i = 0; i < 200; ++i) {
    for (const Problem* p : {&cls, &reg}) {
      const auto params = init_params(p->spec, rng.next_u64());
      const auto batch = testing::random_batch(*p, rng, 3);
      REQUIRE(loss_only(*p, params, batch) >= 0.0);
    }
  }
}

TEST_CASE("param_distance") {
  const std::vector<double> a = {3.0, 4.0}, zero = {0.0, 0.0};
  CHECK(param_distance(a, a) == 0.0);
  CHECK(param_distance(a, zero) == 5.0);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(6), y(6);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    REQUIRE(param_distance(x, y) == param_distance(y, x));
    REQUIRE(param_distance(x, y) > 0.0);
  }
  CHECK_THROWS_AS(param_distance(a, std::vector<double>{1.0}), Error);
}
