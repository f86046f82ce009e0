#include <cmath>
#include <vector>

#include "aomlab/error.hpp"
#include "aomlab/optim.hpp"
#include "aomlab/rng.hpp"
#include "doctest.h"

using namespace aomlab;

namespace {

Schedule adam_schedule(double beta2, double lr, double eps, double wd = 0.0) {
  return make_schedule(Preset::adam,
                       {{"beta1", 0.0}, {"beta2", beta2}, {"lr", lr}, {"epsilon", eps},
                        {"weight_decay", wd}});
}

}  // namespace

TEST_CASE("zero gradient leaves x fixed and decays v") {
  Schedule s = adam_schedule(0.9, 0.1, 1e-8);
  OptState st = OptState::fresh({1.0, -2.0});
  st.v = {4.0, 9.0};
  const std::vector<double> g = {0.0, 0.0};
  OptState next = aom_step(st, g, s);
  CHECK(next.x == st.x);
  CHECK(next.m == std::vector<double>{0.0, 0.0});
  CHECK(next.v[0] == doctest::Approx(0.9 * 4.0).epsilon(1e-15));
  CHECK(next.v[1] == doctest::Approx(0.9 * 9.0).epsilon(1e-15));
  CHECK(next.t == 1);
}

TEST_CASE("scalar step with eps inside the root") {
  Schedule s = make_schedule(Preset::custom, {{"beta1", 0.0}, {"beta2", 0.5}, {"lr", 1.0},
                                              {"epsilon", 1.0}});
  OptState st = OptState::fresh({0.0});
  const std::vector<double> g = {1.0};
  OptState next = aom_step(st, g, s);
  CHECK(next.v[0] == 0.5);
  // x' = 0 - 1 * 0.5 * 1 / sqrt(0.5 + 1): m' = (1 - 0) * 1 = 1 with beta1 = 0.
  const double expected = -1.0 / std::sqrt(1.5);
  CHECK(next.x[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(next.x[0] == doctest::Approx(-0.816497).epsilon(1e-6));
}

TEST_CASE("adagrad first step overwrites v") {
  Schedule s = make_schedule(Preset::adagrad, {{"alpha", 1.0}, {"lr", 0.1}, {"epsilon", 1e-8}});
  CHECK(s.beta_of_t(1) == 0.0);
  OptState st = OptState::fresh({0.0, 0.0});
  st.v = {123.0, 0.5};
  const std::vector<double> g = {3.0, -2.0};
  OptState next = aom_step(st, g, s);
  CHECK(next.v[0] == 9.0);
  CHECK(next.v[1] == 4.0);
}

TEST_CASE("adamw pure decay") {
  Schedule s = adam_schedule(0.999, 0.1, 1e-8, 5.0);
  OptState st = OptState::fresh({1.0});
  const std::vector<double> g = {0.0};
  CHECK(aom_step(st, g, s).x[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("preset schedules") {
  Schedule adam = make_schedule(Preset::adam, {{"beta1", 0.0}, {"beta2", 0.999}, {"lr", 1e-4},
                                               {"epsilon", 1e-8}});
  CHECK(adam.beta_of_t(7) == 0.999);
  CHECK(adam.eta_of_t(7) == 1e-4);
  Schedule ada = make_schedule(Preset::adagrad, {{"alpha", 0.5}, {"lr", 1.0}, {"epsilon", 1e-8}},
                               StepRule::inverse_t);
  CHECK(ada.beta_of_t(2) == 0.75);
  CHECK(ada.eta_of_t(4) == 0.25);
  CHECK(ada.alpha_of_t(3) == 0.0);
  Schedule sgd = make_schedule(Preset::constant_sgd_like, {{"lr", 0.1}, {"epsilon", 1.0}});
  CHECK(sgd.beta_of_t(5) == 1.0);
}

TEST_CASE("make_schedule names missing and out-of-range parameters") {
  auto message = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message([] { make_schedule(Preset::adam, {{"beta1", 0.0}, {"lr", 1.0}, {"epsilon", 1.0}}); })
            .find("beta2") != std::string::npos);
  CHECK(message([] {
          make_schedule(Preset::adagrad, {{"alpha", 1.5}, {"lr", 1.0}, {"epsilon", 1.0}});
        }).find("alpha") != std::string::npos);
  CHECK(message([] {
          make_schedule(Preset::adam,
                        {{"beta1", 0.0}, {"beta2", 0.9}, {"lr", -1.0}, {"epsilon", 1.0}});
        }).find("lr") != std::string::npos);
  CHECK_THROWS_AS(make_schedule(Preset::custom, {{"beta1", 0.0}, {"beta2", 0.9}, {"alpha", 1.0},
                                                 {"lr", 1.0}, {"epsilon", 1.0}}),
                  Error);
}

TEST_CASE("dimension mismatch and non-finite gradients are rejected without mutation") {
  Schedule s = adam_schedule(0.9, 0.1, 1e-8);
  OptState st = OptState::fresh({1.0, 2.0});
  const std::vector<double> short_grad = {1.0};
  CHECK_THROWS_AS(aom_step(st, short_grad, s), Error);
  const std::vector<double> bad = {1.0, std::nan("")};
  OptState copy = st;
  try {
    aom_step_inplace(copy, bad, s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numeric);
  }
  CHECK(copy == st);
  const std::vector<double> inf = {INFINITY, 0.0};
  CHECK_THROWS_AS(aom_step(st, inf, s), Error);
}

TEST_CASE("v stays nonnegative under random gradient streams") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const double beta = rng.uniform(0.0, 1.0);
    Schedule s = adam_schedule(beta == 0.0 ? 0.5 : beta, rng.uniform(1e-4, 1.0), 1e-8, 0.0);
    OptState st = OptState::fresh(std::vector<double>(5, 0.0));
    for (int t = 0; t < 200; ++t) {
      std::vector<double> g(5);
      for (double& x : g) x = rng.normal(0.0, std::exp(rng.uniform(-10.0, 5.0)));
      aom_step_inplace(st, g, s);
      for (double v : st.v) REQUIRE(v >= 0.0);
    }
  }
}

TEST_CASE("aom_step is deterministic and matches the in-place form") {
  Rng rng(7);
  Schedule s = adam_schedule(0.99, 0.01, 1e-8, 0.3);
  OptState a = OptState::fresh({0.3, -0.1, 2.0});
  OptState b = a;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> g = {rng.normal(), rng.normal(), rng.normal()};
    OptState p = aom_step(a, g, s);
    OptState q = aom_step(a, g, s);
    REQUIRE(p == q);
    aom_step_inplace(b, g, s);
    REQUIRE(b == p);
    a = p;
  }
}

TEST_CASE("custom schedules reproduce the adam and adagrad presets") {
  Rng rng(3);
  Schedule adam = adam_schedule(0.95, 0.05, 1e-6);
  Schedule custom_c = make_schedule(Preset::custom, {{"beta1", 0.0}, {"beta2", 0.95},
                                                     {"lr", 0.05}, {"epsilon", 1e-6}});
  Schedule ada = make_schedule(Preset::adagrad, {{"alpha", 0.7}, {"lr", 0.05}, {"epsilon", 1e-6}});
  Schedule custom_h = make_schedule(Preset::custom, {{"beta1", 0.0}, {"alpha", 0.7},
                                                     {"lr", 0.05}, {"epsilon", 1e-6}});
  OptState a1 = OptState::fresh({1.0, 1.0}), a2 = a1, h1 = a1, h2 = a1;
  for (int t = 0; t < 300; ++t) {
    std::vector<double> g = {rng.normal(), rng.normal()};
    aom_step_inplace(a1, g, adam);
    aom_step_inplace(a2, g, custom_c);
    aom_step_inplace(h1, g, ada);
    aom_step_inplace(h2, g, custom_h);
  }
  CHECK(a1 == a2);
  CHECK(h1 == h2);
}

TEST_CASE("zero weight decay is the plain update, coordinatewise") {
  Rng rng(11);
  Schedule plain = adam_schedule(0.9, 0.02, 1e-8);
  Schedule decoupled = plain;
  decoupled.weight_decay = 0.0;
  OptState a = OptState::fresh({0.5, -0.5, 0.25});
  for (int t = 0; t < 50; ++t) {
    std::vector<double> g = {rng.normal(), rng.normal(), rng.normal()};
    OptState p = aom_step(a, g, plain);
    OptState q = aom_step(a, g, decoupled);
    REQUIRE(p == q);
    // Independent evaluation of the plain update.
    for (std::size_t i = 0; i < 3; ++i) {
      const double v = 0.9 * a.v[i] + 0.1 * g[i] * g[i];
      const double x = a.x[i] - 0.02 * g[i] / std::sqrt(v + 1e-8);
      REQUIRE(p.v[i] == doctest::Approx(v).epsilon(1e-14));
      REQUIRE(p.x[i] == doctest::Approx(x).epsilon(1e-14));
    }
    a = p;
  }
}

TEST_CASE("initial second moment is configurable") {
  OptState st = OptState::fresh({0.0, 0.0}, 0.25);
  CHECK(st.v == std::vector<double>{0.25, 0.25});
  CHECK_THROWS_AS(OptState::fresh({0.0}, -1.0), Error);
}

TEST_CASE("preset and step rule names round-trip") {
  for (Preset p : {Preset::adam, Preset::adagrad, Preset::constant_sgd_like, Preset::custom}) {
    CHECK(parse_preset(preset_name(p)) == p);
  }
  for (StepRule r : {StepRule::constant, StepRule::inverse_t}) {
    CHECK(parse_step_rule(step_rule_name(r)) == r);
  }
  CHECK_THROWS_AS(parse_preset("adamw"), Error);
}
