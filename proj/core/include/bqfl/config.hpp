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

// Flat `key = value` run configuration. The full key list, with defaults,
// is in docs/config.md.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bqfl/analytics.hpp"
#include "bqfl/data.hpp"
#include "bqfl/types.hpp"
#include "bqfl/vqc.hpp"

namespace bqfl::config {

enum class ReadoutChoice { Auto, Softmax, Sample };
enum class Timing { Simulated, Measured };

struct RunConfig {
  Mode mode = Mode::BqflAvg;
  int n_qubits = 8;
  int k_layers = 2;
  ReadoutChoice readout = ReadoutChoice::Auto;
  int n_workers = 7;
  int n_miners = 2;
  int m_classes = 4;
  std::set<int> removed_classes{8, 9};
  data::EncodingMode encoding = data::EncodingMode::Vanilla;
  int epochs = 5;
  int batch_size = 128;
  double learning_rate = 0.01;
  int rounds = 3;
  std::uint64_t seed = 0;

  int samples_per_worker = 0;  // 0 = whole shard
  int test_samples = 0;        // 0 = whole filtered test set
  int validation_samples = 500;
  double init_stddev = 0.1;
  int mlp_hidden = 32;
  int mlp_input_side = 16;

  double latency_mean_s = 0.1;
  double t_create_s = 0.05;
  Timing timing = Timing::Simulated;
  double t_gate_s = 1e-9;
  double reward_update = 1.0;
  double reward_block = 2.0;
  double genesis_stake = 1.0;
  double tau = 0.0;

  std::string train_images = "data/mnist-5k/train-images-idx3-ubyte";
  std::string train_labels = "data/mnist-5k/train-labels-idx1-ubyte";
  std::string test_images = "data/mnist-5k/t10k-images-idx3-ubyte";
  std::string test_labels = "data/mnist-5k/t10k-labels-idx1-ubyte";
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  std::optional<analytics::BoundConstants> bounds;
  double meta_d_rate = 20.0;
  double meta_uplink_error = 0.0;
  double meta_vr_e = 1.0;

  int n_classes() const { return 10 - static_cast<int>(removed_classes.size()); }
  std::vector<int> kept_classes() const;
  vqc::ReadoutMode readout_mode() const;
  data::ShardSpec shard_spec() const;

  bool operator==(const RunConfig&) const = default;
};

std::string_view to_string(ReadoutChoice choice);
std::string_view to_string(Timing timing);

/// Parses text without checking cross-field invariants. Unknown keys,
/// duplicates and unparsable values throw ConfigError naming the key.
RunConfig parse_config(std::string_view text);

/// Sets one key on an existing config, same rules as parse_config.
void apply_override(RunConfig& cfg, std::string_view key, std::string_view value);

/// Splits "key=value"; throws ConfigError when '=' is missing.
std::pair<std::string, std::string> split_assignment(std::string_view text);

/// Throws ConfigError naming the violated invariant.
void validate(const RunConfig& cfg);

/// parse_config + validate.
RunConfig load_config(std::string_view text);

/// Reads `path` (empty = defaults only), applies `overrides` in order, validates.
RunConfig load_config_file(const std::filesystem::path& path,
                           std::span<const std::pair<std::string, std::string>> overrides = {});

/// Every key in fixed order; reals with 17 significant digits, so the
/// result re-loads to an equal RunConfig.
std::string to_text(const RunConfig& cfg);

}  // namespace bqfl::config
