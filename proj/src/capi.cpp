#include "aomlab/aomlab.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "aomlab/bounds.hpp"
#include "aomlab/config.hpp"
#include "aomlab/error.hpp"
#include "aomlab/experiment.hpp"
#include "aomlab/plot.hpp"

struct aomlab_config {
  aomlab::ExperimentConfig value;
};

struct aomlab_result {
  std::string summary;
  std::size_t steps = 0;
  std::size_t diverged = 0;
  std::uint64_t data_hash = 0;
  bool has_growth = false;
  aomlab::GrowthFit growth;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<double> sweep_final_delta;
};

namespace {

thread_local std::string last_error;

aomlab_status set_error(aomlab_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
aomlab_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return AOMLAB_OK;
  } catch (const aomlab::Error& e) {
    return set_error(static_cast<aomlab_status>(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(AOMLAB_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(AOMLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(AOMLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(AOMLAB_ERR_INTERNAL, "unknown error");
  }
}

aomlab_status null_arg(const char* name) {
  return set_error(AOMLAB_ERR_INVALID_ARGUMENT, std::string(name) + " is null");
}

aomlab::BoundConstants to_constants(const aomlab_bound_constants& c) {
  aomlab::BoundConstants k;
  k.mu = c.mu;
  k.L = c.L;
  k.M = c.M;
  k.lambda1 = c.lambda1;
  k.lambda2 = c.lambda2;
  k.epsilon = c.epsilon;
  k.n = c.n;
  k.c = c.c;
  k.alpha = c.alpha;
  k.beta = c.beta;
  k.validate();
  return k;
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) {
      aomlab::fail(aomlab::ErrorCode::config, "empty value in list '" + text + "'");
    }
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) aomlab::fail(aomlab::ErrorCode::config, "no sweep values given");
  return out;
}

}  // namespace

extern "C" {

const char* aomlab_version(void) { return "0.1.0"; }

const char* aomlab_last_error(void) { return last_error.c_str(); }

const char* aomlab_status_name(aomlab_status status) {
  switch (status) {
    case AOMLAB_OK: return "ok";
    case AOMLAB_ERR_CONFIG: return "config error";
    case AOMLAB_ERR_ALL_DIVERGED: return "all trials diverged";
    case AOMLAB_ERR_IO: return "I/O error";
    case AOMLAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AOMLAB_ERR_NUMERIC: return "numeric error";
    case AOMLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

aomlab_status aomlab_config_load(const char* path, aomlab_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new aomlab_config{aomlab::load_config(path)}; });
}

aomlab_status aomlab_config_parse(const char* text, aomlab_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new aomlab_config{aomlab::parse_config(text)}; });
}

aomlab_status aomlab_config_set(aomlab_config* config, const char* key, const char* value) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] { aomlab::set_config_value(config->value, key, value); });
}

aomlab_status aomlab_config_serialize(const aomlab_config* config, char* buffer,
                                      size_t capacity, size_t* length) {
  if (!config) return null_arg("config");
  return guarded([&] {
    const std::string text = aomlab::serialize_config(config->value);
    if (length) *length = text.size();
    if (buffer && capacity > text.size()) {
      std::memcpy(buffer, text.c_str(), text.size() + 1);
    } else if (buffer) {
      aomlab::fail(aomlab::ErrorCode::invalid_argument,
                   "buffer too small: need " + std::to_string(text.size() + 1) + " bytes");
    }
  });
}

void aomlab_config_free(aomlab_config* config) { delete config; }

aomlab_status aomlab_run(const aomlab_config* config, aomlab_result** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const auto bundle = aomlab::run_experiment(config->value);
    auto* r = new aomlab_result;
    const auto& s = bundle.trials.summary;
    r->summary = bundle.summary_line;
    r->steps = s.steps();
    r->diverged = bundle.trials.diverged;
    r->data_hash = bundle.data_hash;
    if (bundle.growth) {
      r->has_growth = true;
      r->growth = *bundle.growth;
    }
    r->series = {{"delta", s.delta.mean},
                 {"sigma", s.sigma.mean},
                 {"train_loss", s.train_loss.mean},
                 {"test_loss", s.test_loss.mean},
                 {"gen_gap", s.gen_gap.mean}};
    if (bundle.bounds) {
      r->series.emplace_back("delta_bound", bundle.bounds->delta_bound);
      r->series.emplace_back("sigma_bound", bundle.bounds->sigma_bound);
    }
    *out = r;
  });
}

aomlab_status aomlab_sweep(const aomlab_config* config, const char* param, const char* values,
                           aomlab_result** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const auto& c = config->value;
    const std::string p = param ? param : c.sweep_param;
    const auto v = values ? split_values(values) : c.sweep_values;
    if (p.empty() || v.empty()) {
      aomlab::fail(aomlab::ErrorCode::config, "sweep: no parameter or values given");
    }
    const auto bundle = aomlab::run_sweep(c, p, v);
    auto* r = new aomlab_result;
    r->summary = bundle.summary_line;
    for (const auto& point : bundle.points) {
      const auto& s = point.result.trials.summary;
      r->sweep_final_delta.push_back(s.delta.mean.back());
      r->diverged += point.result.trials.diverged;
      r->steps = s.steps();
      r->data_hash = point.result.data_hash;
    }
    *out = r;
  });
}

aomlab_status aomlab_bounds(const aomlab_config* config, aomlab_result** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    std::vector<std::string> files;
    const auto table = aomlab::run_bounds(config->value, &files);
    auto* r = new aomlab_result;
    r->steps = table.t.size();
    r->summary = config->value.name + ": bounds for t=" + std::to_string(table.t0 + 1) + ".." +
                 std::to_string(config->value.steps) + " written to " + files.front();
    for (const auto& w : table.warnings) r->summary += "\nwarning: " + w;
    r->series = {{"delta_bound", table.delta_bound}, {"sigma_bound", table.sigma_bound}};
    for (const auto& cf : table.closed_forms) r->series.push_back(cf);
    *out = r;
  });
}

aomlab_status aomlab_plot(const char* summary_csv, const char* metric, int log_y,
                          const char* out_svg) {
  if (!summary_csv) return null_arg("summary_csv");
  if (!metric) return null_arg("metric");
  if (!out_svg) return null_arg("out_svg");
  return guarded([&] { aomlab::plot_summary_metric(summary_csv, metric, out_svg, log_y != 0); });
}

const char* aomlab_result_summary(const aomlab_result* result) {
  return result ? result->summary.c_str() : "";
}

size_t aomlab_result_steps(const aomlab_result* result) { return result ? result->steps : 0; }

size_t aomlab_result_diverged(const aomlab_result* result) {
  return result ? result->diverged : 0;
}

uint64_t aomlab_result_data_hash(const aomlab_result* result) {
  return result ? result->data_hash : 0;
}

aomlab_status aomlab_result_series(const aomlab_result* result, const char* metric,
                                   const double** data, size_t* length) {
  if (!result) return null_arg("result");
  if (!metric) return null_arg("metric");
  if (!data || !length) return null_arg("data");
  for (const auto& [name, values] : result->series) {
    if (name == metric) {
      *data = values.data();
      *length = values.size();
      return AOMLAB_OK;
    }
  }
  return set_error(AOMLAB_ERR_INVALID_ARGUMENT,
                   std::string("result has no series '") + metric + "'");
}

aomlab_status aomlab_result_growth(const aomlab_result* result, double* r, double* r_stderr) {
  if (!result) return null_arg("result");
  if (!result->has_growth) {
    return set_error(AOMLAB_ERR_INVALID_ARGUMENT, "growth fit was not requested");
  }
  if (r) *r = result->growth.r;
  if (r_stderr) *r_stderr = result->growth.r_stderr;
  return AOMLAB_OK;
}

size_t aomlab_result_sweep_size(const aomlab_result* result) {
  return result ? result->sweep_final_delta.size() : 0;
}

aomlab_status aomlab_result_sweep_final_delta(const aomlab_result* result, size_t index,
                                              double* value) {
  if (!result) return null_arg("result");
  if (!value) return null_arg("value");
  if (index >= result->sweep_final_delta.size()) {
    return set_error(AOMLAB_ERR_INVALID_ARGUMENT, "sweep index out of range");
  }
  *value = result->sweep_final_delta[index];
  return AOMLAB_OK;
}

void aomlab_result_free(aomlab_result* result) { delete result; }

double aomlab_operator_norm_2x2(double a11, double a12, double a21, double a22) {
  return aomlab::operator_norm_2x2({{{a11, a12}, {a21, a22}}});
}

aomlab_status aomlab_adagrad_cor2(const aomlab_bound_constants* constants, double T,
                                  double* bound, double* t0_star) {
  if (!constants) return null_arg("constants");
  return guarded([&] {
    const auto res = aomlab::adagrad_bound_cor2(T, to_constants(*constants));
    if (bound) *bound = res.bound;
    if (t0_star) *t0_star = res.t0_star;
  });
}

aomlab_status aomlab_theorem4(const aomlab_bound_constants* constants, int64_t T, int64_t t0,
                              double* bound) {
  if (!constants) return null_arg("constants");
  if (!bound) return null_arg("bound");
  return guarded([&] {
    const auto k = to_constants(*constants);
    *bound = aomlab::theorem4_bound(T, t0, k, aomlab::AlphaSchedule::harmonic(k.alpha));
  });
}

aomlab_status aomlab_adamw_region(const aomlab_bound_constants* constants, double beta,
                                  double eta, double* beta_threshold, int* feasible,
                                  double* lambda_lo, double* lambda_hi) {
  if (!constants) return null_arg("constants");
  return guarded([&] {
    const auto region = aomlab::adamw_region(to_constants(*constants), beta, eta);
    if (beta_threshold) *beta_threshold = region.beta_threshold;
    if (feasible) *feasible = region.feasible ? 1 : 0;
    if (lambda_lo) *lambda_lo = region.lambda_lo;
    if (lambda_hi) *lambda_hi = region.lambda_hi;
  });
}

}  // extern "C"
