// Copyright 2026 The bqfl-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bqfl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "bqfl/error.hpp"

namespace bqfl::config {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': expected " + std::string(expected) +
                    ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_scalar(std::string_view key, std::string_view value, std::string_view expected) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, expected);
  return out;
}

int as_int(std::string_view key, std::string_view value) {
  return parse_scalar<int>(key, value, "an integer");
}

double as_real(std::string_view key, std::string_view value) {
  const double v = parse_scalar<double>(key, value, "a real number");
  if (!std::isfinite(v)) bad_value(key, value, "a finite real number");
  return v;
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  if (trim(value).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = value.find(',', start);
    out.push_back(trim(value.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> as_real_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (std::string_view item : split_list(value)) out.push_back(as_real(key, item));
  return out;
}

template <typename T>
std::string join(const T& items, const std::function<std::string(typename T::value_type)>& fmt) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    out += fmt(item);
  }
  return out;
}

analytics::BoundConstants& bounds_of(RunConfig& cfg) {
  if (!cfg.bounds) cfg.bounds.emplace();
  return *cfg.bounds;
}

struct Key {
  std::string_view name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
  bool bound = false;  // emitted only when bound constants are present
};

std::string real(double v) { return analytics::format_real(v); }

const std::vector<Key>& keys() {
  using analytics::format_real;
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    const auto int_key = [&k](std::string_view name, int RunConfig::*field) {
      k.push_back({name, [name, field](RunConfig& c, std::string_view v) { c.*field = as_int(name, v); },
                   [field](const RunConfig& c) { return std::to_string(c.*field); }});
    };
    const auto real_key = [&k](std::string_view name, double RunConfig::*field) {
      k.push_back({name, [name, field](RunConfig& c, std::string_view v) { c.*field = as_real(name, v); },
                   [field](const RunConfig& c) { return real(c.*field); }});
    };
    const auto text_key = [&k](std::string_view name, std::string RunConfig::*field) {
      k.push_back({name, [field](RunConfig& c, std::string_view v) { c.*field = std::string(v); },
                   [field](const RunConfig& c) { return c.*field; }});
    };

    k.push_back({"mode",
                 [](RunConfig& c, std::string_view v) {
                   const auto m = parse_mode(v);
                   if (!m) bad_value("mode", v, "bqfl-avg, bqfl-inf or bcfl-avg");
                   c.mode = *m;
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.mode)); }});
    int_key("n_qubits", &RunConfig::n_qubits);
    int_key("k_layers", &RunConfig::k_layers);
    k.push_back({"readout",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "auto") c.readout = ReadoutChoice::Auto;
                   else if (v == "softmax") c.readout = ReadoutChoice::Softmax;
                   else if (v == "sample") c.readout = ReadoutChoice::Sample;
                   else bad_value("readout", v, "auto, softmax or sample");
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.readout)); }});
    int_key("n_workers", &RunConfig::n_workers);
    int_key("n_miners", &RunConfig::n_miners);
    int_key("m_classes", &RunConfig::m_classes);
    k.push_back({"removed_classes",
                 [](RunConfig& c, std::string_view v) {
                   c.removed_classes.clear();
                   for (std::string_view item : split_list(v)) {
                     c.removed_classes.insert(as_int("removed_classes", item));
                   }
                 },
                 [](const RunConfig& c) {
                   return join(c.removed_classes, [](int x) { return std::to_string(x); });
                 }});
    k.push_back({"encoding",
                 [](RunConfig& c, std::string_view v) {
                   const auto e = data::parse_encoding(v);
                   if (!e) bad_value("encoding", v, "vanilla, mean or half");
                   c.encoding = *e;
                 },
                 [](const RunConfig& c) { return std::string(data::to_string(c.encoding)); }});
    int_key("epochs", &RunConfig::epochs);
    int_key("batch_size", &RunConfig::batch_size);
    real_key("learning_rate", &RunConfig::learning_rate);
    int_key("rounds", &RunConfig::rounds);
    k.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   c.seed = parse_scalar<std::uint64_t>("seed", v, "an unsigned 64-bit integer");
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    int_key("samples_per_worker", &RunConfig::samples_per_worker);
    int_key("test_samples", &RunConfig::test_samples);
    int_key("validation_samples", &RunConfig::validation_samples);
    real_key("init_stddev", &RunConfig::init_stddev);
    int_key("mlp_hidden", &RunConfig::mlp_hidden);
    int_key("mlp_input_side", &RunConfig::mlp_input_side);
    real_key("latency_mean_s", &RunConfig::latency_mean_s);
    real_key("t_create_s", &RunConfig::t_create_s);
    k.push_back({"timing",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "simulated") c.timing = Timing::Simulated;
                   else if (v == "measured") c.timing = Timing::Measured;
                   else bad_value("timing", v, "simulated or measured");
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.timing)); }});
    real_key("t_gate_s", &RunConfig::t_gate_s);
    real_key("reward_update", &RunConfig::reward_update);
    real_key("reward_block", &RunConfig::reward_block);
    real_key("genesis_stake", &RunConfig::genesis_stake);
    real_key("tau", &RunConfig::tau);
    text_key("train_images", &RunConfig::train_images);
    text_key("train_labels", &RunConfig::train_labels);
    text_key("test_images", &RunConfig::test_images);
    text_key("test_labels", &RunConfig::test_labels);
    text_key("output_dir", &RunConfig::output_dir);
    int_key("threads", &RunConfig::threads);
    real_key("meta_d_rate", &RunConfig::meta_d_rate);
    real_key("meta_uplink_error", &RunConfig::meta_uplink_error);
    real_key("meta_vr_e", &RunConfig::meta_vr_e);

    const auto bound_real = [&k](std::string_view name, double analytics::BoundConstants::*field) {
      k.push_back({name,
                   [name, field](RunConfig& c, std::string_view v) { bounds_of(c).*field = as_real(name, v); },
                   [field](const RunConfig& c) { return real((*c.bounds).*field); }, true});
    };
    const auto bound_int = [&k](std::string_view name, int analytics::BoundConstants::*field) {
      k.push_back({name,
                   [name, field](RunConfig& c, std::string_view v) { bounds_of(c).*field = as_int(name, v); },
                   [field](const RunConfig& c) { return std::to_string((*c.bounds).*field); }, true});
    };
    const auto bound_list = [&k](std::string_view name, std::vector<double> analytics::BoundConstants::*field) {
      k.push_back({name,
                   [name, field](RunConfig& c, std::string_view v) {
                     bounds_of(c).*field = as_real_list(name, v);
                   },
                   [field](const RunConfig& c) {
                     return join((*c.bounds).*field, [](double x) { return real(x); });
                   },
                   true});
    };
    bound_real("bound_L", &analytics::BoundConstants::L_smooth);
    bound_real("bound_mu", &analytics::BoundConstants::mu);
    bound_list("bound_sigma", &analytics::BoundConstants::sigma);
    bound_list("bound_p", &analytics::BoundConstants::p);
    bound_real("bound_Gamma", &analytics::BoundConstants::Gamma);
    bound_real("bound_G", &analytics::BoundConstants::G);
    bound_int("bound_E", &analytics::BoundConstants::E_local);
    bound_int("bound_T", &analytics::BoundConstants::T_rounds);
    bound_real("bound_theta_gap", &analytics::BoundConstants::theta_gap);
    return k;
  }();
  return table;
}

const Key& find_key(std::string_view name) {
  for (const Key& k : keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + std::string(name) + "'");
}

}  // namespace

std::vector<int> RunConfig::kept_classes() const {
  std::vector<int> out;
  for (int c = 0; c < 10; ++c) {
    if (!removed_classes.contains(c)) out.push_back(c);
  }
  return out;
}

vqc::ReadoutMode RunConfig::readout_mode() const {
  vqc::Readout kind = vqc::Readout::Softmax;
  switch (readout) {
    case ReadoutChoice::Softmax: kind = vqc::Readout::Softmax; break;
    case ReadoutChoice::Sample: kind = vqc::Readout::Sample; break;
    case ReadoutChoice::Auto:
      kind = n_classes() <= n_qubits ? vqc::Readout::Softmax : vqc::Readout::Sample;
      break;
  }
  return {kind, n_classes()};
}

data::ShardSpec RunConfig::shard_spec() const { return {m_classes, n_workers, kept_classes()}; }

std::string_view to_string(ReadoutChoice choice) {
  switch (choice) {
    case ReadoutChoice::Auto: return "auto";
    case ReadoutChoice::Softmax: return "softmax";
    case ReadoutChoice::Sample: return "sample";
  }
  return "auto";
}

std::string_view to_string(Timing timing) {
  return timing == Timing::Measured ? "measured" : "simulated";
}

void apply_override(RunConfig& cfg, std::string_view key, std::string_view value) {
  find_key(trim(key)).set(cfg, trim(value));
}

std::pair<std::string, std::string> split_assignment(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(text) + "'");
  }
  return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto [key, value] = split_assignment(line);
    if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'");
    apply_override(cfg, key, value);
  }
  return cfg;
}

void validate(const RunConfig& c) {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(c.n_qubits >= 2 && c.n_qubits <= qsim::kMaxQubits && c.n_qubits % 2 == 0,
          "n_qubits must be even and in 2..12 (got " + std::to_string(c.n_qubits) + ")");
  require(c.k_layers >= 1, "k_layers must be >= 1");
  require(c.n_workers >= 1, "n_workers must be >= 1");
  require(c.n_miners >= 1, "n_miners must be >= 1");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.learning_rate >= 0.0 && std::isfinite(c.learning_rate), "learning_rate must be finite and >= 0");
  require(c.epochs >= 1, "epochs must be >= 1");
  require(c.rounds >= 1, "rounds must be >= 1");
  for (int r : c.removed_classes) require(r >= 0 && r <= 9, "removed_classes entries must be digits 0..9");
  require(c.n_classes() >= 2, "at least two classes must remain");
  const std::vector<int> kept = c.kept_classes();
  require(kept.back() == c.n_classes() - 1,
          "removed_classes must be the highest labels so kept labels are 0..C-1");
  require(c.m_classes >= 1 && c.m_classes <= c.n_classes(),
          "m_classes must lie in 1.." + std::to_string(c.n_classes()));
  if (c.mode != Mode::BcflAvg) {
    try {
      c.readout_mode().validate(c.n_qubits);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("invalid config: ") + e.what());
    }
  }
  require(c.samples_per_worker >= 0, "samples_per_worker must be >= 0");
  require(c.test_samples >= 0, "test_samples must be >= 0");
  require(c.validation_samples >= 1, "validation_samples must be >= 1");
  require(c.init_stddev >= 0.0, "init_stddev must be >= 0");
  require(c.mlp_hidden >= 1 && c.mlp_input_side >= 1, "mlp dimensions must be >= 1");
  require(c.latency_mean_s >= 0.0 && c.t_create_s >= 0.0 && c.t_gate_s >= 0.0, "times must be >= 0");
  require(c.reward_update >= 0.0 && c.reward_block >= 0.0, "rewards must be >= 0");
  require(c.genesis_stake > 0.0, "genesis_stake must be > 0");
  require(c.tau >= 0.0 && c.tau <= 1.0, "tau must lie in [0, 1]");
  require(c.threads >= 0, "threads must be >= 0");
  require(c.meta_uplink_error >= 0.0 && c.meta_uplink_error <= 1.0, "meta_uplink_error must lie in [0, 1]");
  require(c.meta_d_rate >= 0.0 && c.meta_vr_e >= 0.0, "meta_d_rate and meta_vr_e must be >= 0");
  if (c.bounds) {
    try {
      c.bounds->validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("invalid bound constants: ") + e.what());
    }
  }
}

RunConfig load_config(std::string_view text) {
  RunConfig cfg = parse_config(text);
  validate(cfg);
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path,
                           std::span<const std::pair<std::string, std::string>> overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  RunConfig cfg = parse_config(text);
  for (const auto& [key, value] : overrides) apply_override(cfg, key, value);
  validate(cfg);
  return cfg;
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const Key& k : keys()) {
    if (k.bound && !cfg.bounds) continue;
    out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

}  // namespace bqfl::config
