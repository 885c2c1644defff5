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

// Federated rounds over workers and miners, recorded on a PoS ledger.
//
// Device ids: workers 0..W-1, miners W..W+M-1. Per round: workers train in
// parallel from the global model (or their own model in bqfl-inf); a
// stake-weighted miner leads, validates every update against its slice
// and commits the accepted ones; every node then averages the recorded
// updates itself and the results must agree bit for bit.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bqfl/analytics.hpp"
#include "bqfl/chain.hpp"
#include "bqfl/config.hpp"
#include "bqfl/data.hpp"
#include "bqfl/fed.hpp"

namespace bqfl::fed {

struct Datasets {
  data::RawDataset train;
  data::RawDataset test;
};

/// Loads the four IDX files named in the config.
Datasets load_datasets(const config::RunConfig& cfg);

enum class RoundStatus { Committed, Aborted };

struct RoundOutcome {
  int round = 0;
  RoundStatus status = RoundStatus::Committed;
  /// Indexed by worker; nullopt when the shard was empty.
  std::vector<std::optional<LocalResult>> local;
  chain::DeviceId leader = -1;
  std::vector<chain::UpdateVerdict> verdicts;  // one per trained worker, ascending id
  std::size_t accepted = 0;
  double block_time_s = 0.0;
  double expected_block_time_s = 0.0;
  double global_test_accuracy = 0.0;
  double measured_seconds = 0.0;
  std::vector<analytics::MetricsRow> rows;
  std::vector<std::string> events;
};

class Simulation {
 public:
  Simulation(config::RunConfig cfg, const Datasets& raw);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;
  Simulation(Simulation&&) = default;
  Simulation& operator=(Simulation&&) = default;

  /// Runs the next round. An all-rejected round leaves models, stakes and
  /// the ledger untouched and reports RoundStatus::Aborted.
  RoundOutcome run_round();

  /// Runs cfg.rounds rounds, stopping after the first aborted one.
  std::vector<RoundOutcome> run_all();

  const config::RunConfig& config() const noexcept { return cfg_; }
  const Model& model() const noexcept { return *model_; }
  const chain::Ledger& ledger() const noexcept { return ledger_; }
  const chain::StakeTable& stakes() const noexcept { return stakes_; }
  double initial_total_stake() const noexcept { return initial_total_stake_; }
  std::span<const double> global_params() const noexcept { return global_; }
  std::span<const DeviceState> devices() const noexcept { return devices_; }
  std::span<const LabeledView> test_set() const noexcept { return test_views_; }
  std::span<const LabeledView> validation_set() const noexcept { return validation_views_; }
  std::span<const analytics::MetricsRow> metrics() const noexcept { return metrics_; }
  int rounds_completed() const noexcept { return round_; }

  /// Worker ids holding classes in their shard, per shard spec.
  std::vector<int> shard_classes(int worker) const;

  /// Global model accuracy, or the ensemble of worker models in bqfl-inf.
  double test_accuracy() const;

 private:
  int n_workers() const { return cfg_.n_workers; }
  RoundConfig round_config() const;

  config::RunConfig cfg_;
  std::unique_ptr<Model> model_;
  std::vector<data::PreparedSample> train_;
  std::vector<data::PreparedSample> test_;
  std::vector<LabeledView> test_views_;
  std::vector<LabeledView> validation_views_;
  std::vector<DeviceState> devices_;
  std::vector<double> global_;
  chain::StakeTable stakes_;
  double initial_total_stake_ = 0.0;
  chain::Ledger ledger_;
  double clock_s_ = 0.0;
  int round_ = 0;
  std::vector<analytics::MetricsRow> metrics_;
};

}  // namespace bqfl::fed
