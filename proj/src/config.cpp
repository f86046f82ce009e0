#include "aomlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "aomlab/error.hpp"

namespace aomlab {

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::config, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) config_error("empty element in list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    config_error(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), last, out);
  if (ec != std::errc() || ptr != last) {
    config_error(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::int64_t to_i64(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), last, out);
  if (ec != std::errc() || ptr != last) {
    config_error(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  config_error(key + ": expected true or false, got '" + v + "'");
}

std::string from_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

const char* sampling_name(SamplingMode m) {
  return m == SamplingMode::uniform_with_replacement ? "uniform" : "epoch";
}

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

const char* constants_name(ConstantsSource s) {
  return s == ConstantsSource::analytic ? "analytic" : "estimated";
}

const std::set<std::string> kOverlays = {"cor1", "cor2", "coro", "adamw_fp"};
const std::set<std::string> kSweepable = {"beta2", "weight_decay", "lr", "preset"};

BoundsConfig& bounds_of(ExperimentConfig& c) {
  if (!c.bounds) c.bounds.emplace();
  return *c.bounds;
}

struct KeyDef {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  // Empty optional: the key is not written for this config.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

std::optional<std::string> opt_real(const std::optional<double>& v) {
  if (!v) return std::nullopt;
  return from_real(*v);
}

const std::vector<KeyDef>& key_table() {
  using C = ExperimentConfig;
  using S = std::string;
  using R = std::optional<std::string>;
  static const std::vector<KeyDef> table = {
      {"experiment", "name", [](C& c, const S&, const S& v) { c.name = v; },
       [](const C& c) -> R { return c.name; }},
      {"experiment", "task",
       [](C& c, const S&, const S& v) { c.task = parse_config_task(v); },
       [](const C& c) -> R { return config_task_name(c.task); }},
      {"experiment", "steps", [](C& c, const S& k, const S& v) { c.steps = to_u64(k, v); },
       [](const C& c) -> R { return std::to_string(c.steps); }},
      {"experiment", "trials", [](C& c, const S& k, const S& v) { c.trials = to_u64(k, v); },
       [](const C& c) -> R { return std::to_string(c.trials); }},
      {"experiment", "batch_size",
       [](C& c, const S& k, const S& v) { c.batch_size = to_u64(k, v); },
       [](const C& c) -> R { return std::to_string(c.batch_size); }},
      {"experiment", "base_seed",
       [](C& c, const S& k, const S& v) { c.base_seed = to_u64(k, v); },
       [](const C& c) -> R { return std::to_string(c.base_seed); }},
      {"experiment", "eval_every",
       [](C& c, const S& k, const S& v) { c.eval_every = to_u64(k, v); },
       [](const C& c) -> R { return std::to_string(c.eval_every); }},
      {"experiment", "output_dir", [](C& c, const S&, const S& v) { c.output_dir = v; },
       [](const C& c) -> R { return c.output_dir; }},
      {"experiment", "sampling",
       [](C& c, const S& k, const S& v) {
         if (v == "uniform") c.sampling = SamplingMode::uniform_with_replacement;
         else if (v == "epoch") c.sampling = SamplingMode::epoch_shuffle;
         else config_error(k + ": expected uniform or epoch, got '" + v + "'");
       },
       [](const C& c) -> R { return sampling_name(c.sampling); }},
      {"experiment", "threads", [](C& c, const S& k, const S& v) { c.threads = to_u64(k, v); },
       [](const C& c) -> R { return std::to_string(c.threads); }},
      {"experiment", "fit_growth",
       [](C& c, const S& k, const S& v) { c.fit_growth = to_bool(k, v); },
       [](const C& c) -> R { return from_bool(c.fit_growth); }},
      {"experiment", "growth_window",
       [](C& c, const S& k, const S& v) { c.growth_window = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.growth_window); }},
      {"experiment", "decouple_indices",
       [](C& c, const S& k, const S& v) { c.decouple_indices = to_bool(k, v); },
       [](const C& c) -> R { return from_bool(c.decouple_indices); }},

      {"model", "hidden_dim",
       [](C& c, const S& k, const S& v) {
         const auto h = to_u64(k, v);
         if (h == 0 || h > 1u << 20) config_error(k + ": must lie in [1, 1048576]");
         c.hidden_dim = static_cast<int>(h);
       },
       [](const C& c) -> R {
         if (c.task == Task::toy) return std::nullopt;
         return std::to_string(c.hidden_dim);
       }},
      {"model", "activation",
       [](C& c, const S& k, const S& v) {
         if (v == "relu") c.activation = Activation::relu;
         else if (v == "tanh") c.activation = Activation::tanh;
         else config_error(k + ": expected relu or tanh, got '" + v + "'");
       },
       [](const C& c) -> R {
         if (c.task == Task::toy) return std::nullopt;
         return activation_name(c.activation);
       }},

      {"optimizer", "preset",
       [](C& c, const S& k, const S& v) {
         try {
           c.preset = parse_preset(v);
         } catch (const Error&) {
           config_error(k + ": unknown preset '" + v + "'");
         }
       },
       [](const C& c) -> R { return preset_name(c.preset); }},
      {"optimizer", "beta_rule",
       [](C& c, const S& k, const S& v) {
         if (v == "constant") c.beta_rule = BetaRule::constant;
         else if (v == "harmonic") c.beta_rule = BetaRule::harmonic;
         else config_error(k + ": expected constant or harmonic, got '" + v + "'");
       },
       [](const C& c) -> R {
         if (c.preset != Preset::custom) return std::nullopt;
         return c.beta_rule == BetaRule::constant ? "constant" : "harmonic";
       }},
      {"optimizer", "beta1", [](C& c, const S& k, const S& v) { c.beta1 = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.beta1); }},
      {"optimizer", "beta2", [](C& c, const S& k, const S& v) { c.beta2 = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.beta2); }},
      {"optimizer", "alpha", [](C& c, const S& k, const S& v) { c.alpha = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.alpha); }},
      {"optimizer", "lr", [](C& c, const S& k, const S& v) { c.lr = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.lr); }},
      {"optimizer", "lr_schedule",
       [](C& c, const S& k, const S& v) {
         try {
           c.lr_schedule = parse_step_rule(v);
         } catch (const Error&) {
           config_error(k + ": expected constant or inv_t, got '" + v + "'");
         }
       },
       [](const C& c) -> R { return step_rule_name(c.lr_schedule); }},
      {"optimizer", "epsilon", [](C& c, const S& k, const S& v) { c.epsilon = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.epsilon); }},
      {"optimizer", "weight_decay",
       [](C& c, const S& k, const S& v) { c.weight_decay = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.weight_decay); }},
      {"optimizer", "v0", [](C& c, const S& k, const S& v) { c.v0 = to_real(k, v); },
       [](const C& c) -> R { return from_real(c.v0); }},

      {"bounds", "constants",
       [](C& c, const S& k, const S& v) {
         if (v == "analytic") bounds_of(c).constants = ConstantsSource::analytic;
         else if (v == "estimated") bounds_of(c).constants = ConstantsSource::estimated;
         else config_error(k + ": expected analytic or estimated, got '" + v + "'");
       },
       [](const C& c) -> R {
         if (!c.bounds) return std::nullopt;
         return constants_name(c.bounds->constants);
       }},
      {"bounds", "overlay",
       [](C& c, const S& k, const S& v) {
         auto items = v.empty() ? std::vector<std::string>{} : split_list(v);
         for (const auto& item : items) {
           if (!kOverlays.count(item)) config_error(k + ": unknown bound '" + item + "'");
         }
         bounds_of(c).overlay = items;
       },
       [](const C& c) -> R {
         if (!c.bounds) return std::nullopt;
         return join_list(c.bounds->overlay);
       }},
      {"bounds", "t0", [](C& c, const S& k, const S& v) { bounds_of(c).t0 = to_i64(k, v); },
       [](const C& c) -> R {
         if (!c.bounds) return std::nullopt;
         return std::to_string(c.bounds->t0);
       }},
      {"bounds", "mu", [](C& c, const S& k, const S& v) { bounds_of(c).mu = to_real(k, v); },
       [](const C& c) -> R { return c.bounds ? opt_real(c.bounds->mu) : std::nullopt; }},
      {"bounds", "L", [](C& c, const S& k, const S& v) { bounds_of(c).L = to_real(k, v); },
       [](const C& c) -> R { return c.bounds ? opt_real(c.bounds->L) : std::nullopt; }},
      {"bounds", "M", [](C& c, const S& k, const S& v) { bounds_of(c).M = to_real(k, v); },
       [](const C& c) -> R { return c.bounds ? opt_real(c.bounds->M) : std::nullopt; }},
      {"bounds", "lambda1",
       [](C& c, const S& k, const S& v) { bounds_of(c).lambda1 = to_real(k, v); },
       [](const C& c) -> R { return c.bounds ? opt_real(c.bounds->lambda1) : std::nullopt; }},
      {"bounds", "lambda2",
       [](C& c, const S& k, const S& v) { bounds_of(c).lambda2 = to_real(k, v); },
       [](const C& c) -> R { return c.bounds ? opt_real(c.bounds->lambda2) : std::nullopt; }},
      {"bounds", "b_includes_mu",
       [](C& c, const S& k, const S& v) { bounds_of(c).b_includes_mu = to_bool(k, v); },
       [](const C& c) -> R {
         if (!c.bounds) return std::nullopt;
         return from_bool(c.bounds->b_includes_mu);
       }},
      {"bounds", "literal_b",
       [](C& c, const S& k, const S& v) { bounds_of(c).literal_b = to_bool(k, v); },
       [](const C& c) -> R {
         if (!c.bounds) return std::nullopt;
         return from_bool(c.bounds->literal_b);
       }},
      {"bounds", "literal_exponent",
       [](C& c, const S& k, const S& v) { bounds_of(c).literal_exponent = to_bool(k, v); },
       [](const C& c) -> R {
         if (!c.bounds) return std::nullopt;
         return from_bool(c.bounds->literal_exponent);
       }},

      {"sweep", "param", [](C& c, const S&, const S& v) { c.sweep_param = v; },
       [](const C& c) -> R {
         if (c.sweep_param.empty()) return std::nullopt;
         return c.sweep_param;
       }},
      {"sweep", "values",
       [](C& c, const S&, const S& v) { c.sweep_values = split_list(v); },
       [](const C& c) -> R {
         if (c.sweep_values.empty()) return std::nullopt;
         return join_list(c.sweep_values);
       }},
  };
  return table;
}

const KeyDef* find_key(const std::string& section, const std::string& key) {
  for (const auto& def : key_table()) {
    if (section == def.section && key == def.key) return &def;
  }
  return nullptr;
}

const KeyDef* resolve_key(const std::string& dotted) {
  const auto dot = dotted.find('.');
  if (dot != std::string::npos) {
    return find_key(dotted.substr(0, dot), dotted.substr(dot + 1));
  }
  const KeyDef* found = nullptr;
  for (const auto& def : key_table()) {
    if (dotted == def.key) {
      if (found) config_error("ambiguous key '" + dotted + "'");
      found = &def;
    }
  }
  return found;
}

const std::vector<std::string> kSections = {"experiment", "model", "optimizer", "bounds",
                                            "sweep"};

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line;
};

std::string qualified(const std::string& section, const std::string& key) {
  return section + "." + key;
}

}  // namespace

const char* config_task_name(Task task) {
  switch (task) {
    case Task::cls: return "cls_blobs";
    case Task::reg: return "reg_quadratic";
    case Task::toy: return "toy_pseudo_huber";
  }
  return "?";
}

Task parse_config_task(const std::string& name) {
  if (name == "cls_blobs") return Task::cls;
  if (name == "reg_quadratic") return Task::reg;
  if (name == "toy_pseudo_huber") return Task::toy;
  config_error("experiment.task: unknown task '" + name +
               "' (expected cls_blobs, reg_quadratic or toy_pseudo_huber)");
}

ExperimentConfig default_config(Task task) {
  ExperimentConfig c;
  c.task = task;
  switch (task) {
    case Task::cls:
      c.batch_size = 3;
      c.hidden_dim = 1024;
      break;
    case Task::reg:
      c.batch_size = 5;
      c.hidden_dim = 128;
      break;
    case Task::toy:
      c.batch_size = 1;
      c.hidden_dim = 1;
      break;
  }
  return c;
}

Problem make_problem(const ExperimentConfig& c) {
  switch (c.task) {
    case Task::cls:
      return Problem::mlp({2, c.hidden_dim, 3, c.activation, LossKind::cross_entropy});
    case Task::reg:
      return Problem::mlp({2, c.hidden_dim, 1, c.activation, LossKind::mse});
    case Task::toy:
      return Problem::pseudo_huber();
  }
  config_error("unknown task");
}

Schedule make_config_schedule(const ExperimentConfig& c) {
  ParamMap p{{"lr", c.lr}, {"epsilon", c.epsilon}, {"weight_decay", c.weight_decay}};
  switch (c.preset) {
    case Preset::adam:
      p["beta1"] = c.beta1;
      p["beta2"] = c.beta2;
      break;
    case Preset::adagrad:
      p["alpha"] = c.alpha;
      break;
    case Preset::constant_sgd_like:
      break;
    case Preset::custom:
      p["beta1"] = c.beta1;
      if (c.beta_rule == BetaRule::harmonic) p["alpha"] = c.alpha;
      else p["beta2"] = c.beta2;
      break;
  }
  try {
    return make_schedule(c.preset, p, c.lr_schedule);
  } catch (const Error& e) {
    config_error(std::string("optimizer.") + e.what());
  }
}

void validate_config(const ExperimentConfig& c) {
  if (c.name.empty()) config_error("experiment.name: must not be empty");
  if (c.name.find_first_of("/\\") != std::string::npos) {
    config_error("experiment.name: must not contain path separators");
  }
  if (c.steps < 1) config_error("experiment.steps: must be >= 1");
  if (c.trials < 1) config_error("experiment.trials: must be >= 1");
  if (c.batch_size < 1 || c.batch_size > kTrainSize) {
    config_error("experiment.batch_size: must lie in [1, " + std::to_string(kTrainSize) + "]");
  }
  if (c.eval_every < 1) config_error("experiment.eval_every: must be >= 1");
  if (c.output_dir.empty()) config_error("experiment.output_dir: must not be empty");
  if (!(c.growth_window > 0.0 && c.growth_window <= 1.0)) {
    config_error("experiment.growth_window: must lie in (0, 1]");
  }
  if (c.task != Task::toy && c.hidden_dim < 1) config_error("model.hidden_dim: must be >= 1");
  if (!(c.v0 >= 0.0)) config_error("optimizer.v0: must be >= 0");
  if (c.preset != Preset::custom && c.beta_rule != BetaRule::constant) {
    config_error("optimizer.beta_rule: only the custom preset takes a beta rule");
  }
  const Schedule schedule = make_config_schedule(c);

  if (c.bounds) {
    const BoundsConfig& b = *c.bounds;
    if (schedule.momentum != 0.0) {
      config_error("optimizer.beta1: bounds require beta1 = 0");
    }
    if (b.t0 < 0 || b.t0 >= static_cast<std::int64_t>(c.steps)) {
      config_error("bounds.t0: must lie in [0, steps)");
    }
    if (b.constants == ConstantsSource::analytic && c.task != Task::toy && !(b.mu && b.L)) {
      config_error("bounds.constants: analytic constants are only known for toy_pseudo_huber; "
                   "set bounds.mu and bounds.L or use estimated");
    }
    for (const auto* v : {&b.mu, &b.L, &b.M, &b.lambda1, &b.lambda2}) {
      if (*v && !(**v >= 0.0)) config_error("bounds: constants must be >= 0");
    }
    for (const auto& o : b.overlay) {
      if (o == "cor1" || o == "cor2") {
        if (c.preset != Preset::adagrad || c.lr_schedule != StepRule::inverse_t) {
          config_error("bounds.overlay: " + o + " needs preset adagrad with lr_schedule inv_t");
        }
      }
      if (o == "coro" && (c.preset != Preset::adam || c.lr_schedule != StepRule::inverse_t)) {
        config_error("bounds.overlay: coro needs preset adam with lr_schedule inv_t");
      }
      if ((o == "cor1" || o == "coro") && b.t0 < 1) {
        config_error("bounds.t0: " + o + " needs t0 >= 1");
      }
      if (o == "adamw_fp" &&
          (c.preset != Preset::adam || c.lr_schedule != StepRule::constant || c.weight_decay <= 0)) {
        config_error("bounds.overlay: adamw_fp needs preset adam, lr_schedule constant and "
                     "weight_decay > 0");
      }
    }
  }

  if (!c.sweep_param.empty() || !c.sweep_values.empty()) {
    if (!kSweepable.count(c.sweep_param)) {
      config_error("sweep.param: '" + c.sweep_param +
                   "' is not sweepable (beta2, weight_decay, lr, preset)");
    }
    if (c.sweep_values.empty()) config_error("sweep.values: must not be empty");
    for (const auto& v : c.sweep_values) {
      ExperimentConfig probe = c;
      probe.sweep_param.clear();
      probe.sweep_values.clear();
      try {
        set_config_value(probe, c.sweep_param, v);
      } catch (const Error& e) {
        config_error(std::string("sweep.values: ") + e.what());
      }
    }
  }
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const KeyDef* def = resolve_key(key);
  if (!def) config_error("unknown key '" + key + "'");
  ExperimentConfig next = c;
  def->set(next, qualified(def->section, def->key), value);
  validate_config(next);
  c = std::move(next);
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::set<std::string> sections_seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool bounds_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        config_error(where + "unknown section [" + section + "]");
      }
      if (!sections_seen.insert(section).second) {
        config_error(where + "duplicate section [" + section + "]");
      }
      if (section == "bounds") bounds_header = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error(where + "missing key");
    if (section.empty()) config_error(where + "key '" + key + "' outside any section");
    if (!find_key(section, key)) {
      config_error(where + "unknown key '" + key + "' in [" + section + "]");
    }
    if (!seen.insert(qualified(section, key)).second) {
      config_error(where + "duplicate key '" + key + "'");
    }
    entries.push_back({section, key, value, line_no});
  }

  Task task = Task::cls;
  for (const auto& e : entries) {
    if (e.section == "experiment" && e.key == "task") {
      try {
        task = parse_config_task(e.value);
      } catch (const Error& err) {
        config_error("line " + std::to_string(e.line) + ": " + err.what());
      }
    }
  }
  ExperimentConfig c = default_config(task);
  if (bounds_header) c.bounds.emplace();
  for (const auto& e : entries) {
    if (task == Task::toy && e.section == "model") {
      config_error("line " + std::to_string(e.line) + ": model." + e.key +
                   " does not apply to toy_pseudo_huber");
    }
    try {
      find_key(e.section, e.key)->set(c, qualified(e.section, e.key), e.value);
    } catch (const Error& err) {
      config_error("line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  std::string current;
  for (const auto& def : key_table()) {
    const auto value = def.get(c);
    const bool header_only = std::string(def.section) == "bounds" && c.bounds;
    if (!value && !header_only) continue;
    if (current != def.section) {
      if (!current.empty()) out += "\n";
      current = def.section;
      out += "[" + current + "]\n";
    }
    if (value) out += std::string(def.key) + " = " + *value + "\n";
  }
  return out;
}

}  // namespace aomlab
