#include <filesystem>
#include <string>

#include "aomlab/config.hpp"
#include "aomlab/error.hpp"
#include "doctest.h"

using namespace aomlab;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const auto c = parse_config("[experiment]\ntask = cls_blobs\n");
  CHECK(c.trials == 20);
  CHECK(c.beta2 == 0.999);
  CHECK(c.beta1 == 0.0);
  CHECK(c.lr == 1e-3);
  CHECK(c.batch_size == 3);
  CHECK(c.hidden_dim == 1024);
  CHECK(c.preset == Preset::adam);
  CHECK_FALSE(c.bounds.has_value());

  const auto r = parse_config("[experiment]\ntask = reg_quadratic\n");
  CHECK(r.batch_size == 5);
  CHECK(r.hidden_dim == 128);
}

TEST_CASE("unknown keys are named in the error") {
  const auto msg = config_error("[experiment]\ntask = cls_blobs\n[optimizer]\nlearning_rat = 0.1\n");
  CHECK(contains(msg, "learning_rat"));
  CHECK(contains(msg, "line 4"));
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(contains(config_error("[experiment]\ntask = cls_blobs\n[nonsense]\n"), "line 3"));
  CHECK(contains(config_error("steps = 3\n"), "line 1"));
  CHECK(contains(config_error("[experiment]\nsteps = 3\nsteps = 4\n"), "line 3"));
  CHECK(contains(config_error("[experiment]\nthis line has no equals sign\n"), "line 2"));
  CHECK(contains(config_error("[experiment]\ntask = cifar10\n"), "task"));
}

TEST_CASE("validation names the offending key") {
  CHECK(contains(config_error("[experiment]\ntask = cls_blobs\ntrials = 0\n"), "trials"));
  CHECK(contains(config_error("[experiment]\ntask = cls_blobs\nsteps = 0\n"), "steps"));
  CHECK(contains(config_error("[experiment]\ntask = cls_blobs\n[optimizer]\nbeta2 = 1.5\n"),
                 "beta2"));
  CHECK(contains(config_error("[experiment]\ntask = cls_blobs\n[optimizer]\nlr = -1\n"), "lr"));
  CHECK(contains(config_error("[experiment]\ntask = toy_pseudo_huber\n[model]\nhidden_dim = 4\n"),
                 "hidden_dim"));
  // bounds need an adaptive schedule without momentum
  CHECK(contains(config_error("[experiment]\ntask = toy_pseudo_huber\n[optimizer]\nbeta1 = 0.9\n"
                              "[bounds]\nconstants = analytic\n"),
                 "beta1"));
}

TEST_CASE("serialize then parse round-trips") {
  auto c = parse_config(
      "[experiment]\nname = demo\ntask = toy_pseudo_huber\nsteps = 300\ntrials = 7\n"
      "base_seed = 12345678901\noutput_dir = out/demo dir\n"
      "[optimizer]\npreset = adagrad\nalpha = 0.5\nlr = 0.3\nlr_schedule = inv_t\n"
      "epsilon = 0.1\nv0 = 0.25\n"
      "[bounds]\nconstants = estimated\noverlay = cor1, cor2\nt0 = 3\nmu = 0.9\n"
      "[sweep]\nparam = lr\nvalues = 0.1, 0.2\n");
  const auto text = serialize_config(c);
  CHECK(parse_config(text) == c);
  CHECK(serialize_config(parse_config(text)) == text);

  for (const char* task : {"cls_blobs", "reg_quadratic"}) {
    auto d = parse_config(std::string("[experiment]\ntask = ") + task + "\n");
    d.lr = 0.1 + 0.2;  // not exactly representable as a short decimal
    CHECK(parse_config(serialize_config(d)) == d);
  }
}

TEST_CASE("load_config from a file") {
  const auto path = std::filesystem::temp_directory_path() / "aomlab_test.cfg";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fputs("# comment\n[experiment]\ntask = reg_quadratic  # trailing\nsteps = 12\n", f);
    std::fclose(f);
  }
  const auto c = load_config(path.string());
  CHECK(c.task == Task::reg);
  CHECK(c.steps == 12);
  std::filesystem::remove(path);
  try {
    load_config(path.string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

TEST_CASE("set_config_value") {
  auto c = parse_config("[experiment]\ntask = cls_blobs\n");
  set_config_value(c, "beta2", "0.9");
  CHECK(c.beta2 == 0.9);
  set_config_value(c, "experiment.trials", "3");
  CHECK(c.trials == 3);
  CHECK_THROWS_AS(set_config_value(c, "experiment.trials", "0"), Error);
  CHECK_THROWS_AS(set_config_value(c, "no_such_key", "1"), Error);
}

TEST_CASE("problem and schedule from a config") {
  auto c = parse_config("[experiment]\ntask = cls_blobs\n[model]\nhidden_dim = 8\n");
  const auto p = make_problem(c);
  CHECK(p.kind == ProblemKind::mlp);
  CHECK(p.spec.output_dim == 3);
  CHECK(p.spec.loss_kind == LossKind::cross_entropy);
  CHECK(p.param_dim == 8 * 2 + 8 + 3 * 8 + 3);
  const auto s = make_config_schedule(c);
  CHECK(s.beta_of_t(5) == 0.999);
  CHECK(s.eta_of_t(5) == 1e-3);

  auto toy = parse_config("[experiment]\ntask = toy_pseudo_huber\n[optimizer]\npreset = adagrad\n");
  CHECK(make_problem(toy).kind == ProblemKind::pseudo_huber_scalar);
  CHECK(make_config_schedule(toy).beta_of_t(4) == doctest::Approx(0.75));
}

TEST_CASE("bundled configs load") {
  const std::filesystem::path dir = std::filesystem::path(AOMLAB_SOURCE_DIR) / "configs";
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const auto c = load_config(entry.path().string());
    CHECK(parse_config(serialize_config(c)) == c);
    ++count;
  }
  CHECK(count >= 7);
}
