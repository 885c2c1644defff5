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

#include "bqfl/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "bqfl/error.hpp"
#include "bqfl/rng.hpp"

namespace bqfl::fed {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::unique_ptr<Model> make_model(const config::RunConfig& cfg) {
  if (cfg.mode == Mode::BcflAvg) {
    const classical::MlpShape shape{cfg.mlp_input_side * cfg.mlp_input_side, cfg.mlp_hidden,
                                    cfg.n_classes()};
    return std::make_unique<ClassicalModel>(shape, cfg.t_gate_s);
  }
  return std::make_unique<QuantumModel>(cfg.n_qubits, cfg.k_layers, cfg.readout_mode(),
                                        cfg.init_stddev, cfg.t_gate_s);
}

data::PreprocessOptions preprocess_options(const config::RunConfig& cfg) {
  if (cfg.mode == Mode::BcflAvg) {
    return {cfg.encoding, cfg.mlp_input_side, cfg.n_classes(), false};
  }
  return {cfg.encoding, 1 << (cfg.n_qubits / 2), cfg.n_classes(), true};
}

}  // namespace

Datasets load_datasets(const config::RunConfig& cfg) {
  return {data::load_idx(cfg.train_images, cfg.train_labels),
          data::load_idx(cfg.test_images, cfg.test_labels)};
}

Simulation::Simulation(config::RunConfig cfg, const Datasets& raw) : cfg_(std::move(cfg)) {
  config::validate(cfg_);
  model_ = make_model(cfg_);

  const data::RawDataset train = data::class_filter(raw.train, cfg_.removed_classes);
  data::RawDataset test = data::class_filter(raw.test, cfg_.removed_classes);
  if (cfg_.test_samples > 0 && test.size() > static_cast<std::size_t>(cfg_.test_samples)) {
    test.labels.resize(static_cast<std::size_t>(cfg_.test_samples));
    test.pixels.resize(test.labels.size() * test.image_size());
  }
  std::vector<double> mean;
  if (cfg_.encoding == data::EncodingMode::Mean) mean = data::mean_image(train);
  const data::PreprocessOptions options = preprocess_options(cfg_);
  train_ = data::preprocess(train, options, mean);
  test_ = data::preprocess(test, options, mean);
  test_views_ = data::views(test_);
  validation_views_.assign(
      test_views_.begin(),
      test_views_.begin() +
          static_cast<std::ptrdiff_t>(
              std::min(test_views_.size(), static_cast<std::size_t>(cfg_.validation_samples))));

  global_ = model_->initial_params(cfg_.seed);
  const data::ShardSpec spec = cfg_.shard_spec();
  std::vector<chain::DeviceId> ids;
  for (int w = 0; w < cfg_.n_workers; ++w) {
    DeviceState d;
    d.id = w;
    d.role = Role::Worker;
    d.params = global_;
    const std::vector<std::size_t> members = data::cycle_m_shard_indices(train_, spec, w);
    const std::vector<std::size_t> keep = data::subsample_positions(
        members.size(), static_cast<std::size_t>(cfg_.samples_per_worker), cfg_.seed, w);
    for (std::size_t pos : keep) d.shard.push_back(train_[members[pos]].view());
    d.optimizer = AdamState::zeros(global_.size());
    devices_.push_back(std::move(d));
    ids.push_back(w);
  }
  for (int m = 0; m < cfg_.n_miners; ++m) {
    DeviceState d;
    d.id = cfg_.n_workers + m;
    d.role = Role::Miner;
    d.params = global_;
    d.optimizer = AdamState::zeros(global_.size());
    ids.push_back(d.id);
    devices_.push_back(std::move(d));
  }
  stakes_ = chain::StakeTable::uniform(ids, cfg_.genesis_stake);
  initial_total_stake_ = stakes_.total();
  ledger_ = chain::Ledger::with_genesis(stakes_, 0.0);
}

std::vector<int> Simulation::shard_classes(int worker) const {
  return cfg_.shard_spec().classes_for(worker);
}

RoundConfig Simulation::round_config() const {
  RoundConfig rc;
  rc.epochs = cfg_.epochs;
  rc.batch_size = static_cast<std::size_t>(cfg_.batch_size);
  rc.learning_rate = cfg_.learning_rate;
  rc.mode = cfg_.mode;
  rc.seed = cfg_.seed;
  rc.measured_timing = cfg_.timing == config::Timing::Measured;
  return rc;
}

double Simulation::test_accuracy() const {
  if (cfg_.mode != Mode::BqflInf) return model_->accuracy(global_, test_views_);
  std::vector<std::vector<double>> models;
  for (int w = 0; w < n_workers(); ++w) models.push_back(devices_[static_cast<std::size_t>(w)].params);
  return ensemble_accuracy(*model_, models, test_views_);
}

RoundOutcome Simulation::run_round() {
  const auto started = Clock::now();
  const int r = round_ + 1;
  const RoundConfig rc = round_config();
  const std::size_t W = static_cast<std::size_t>(n_workers());

  RoundOutcome out;
  out.round = r;
  out.local.resize(W);

  // The starting point is the global model, or each worker's own model
  // when the ensemble is kept.
  std::vector<std::vector<double>> previous(W);
  for (std::size_t w = 0; w < W; ++w) previous[w] = devices_[w].params;
  parallel_for(W, cfg_.threads, [&](std::size_t w) {
    const std::vector<double>& start = cfg_.mode == Mode::BqflInf ? previous[w] : global_;
    out.local[w] = local_train(devices_[w], *model_, rc, start, r);
  });

  std::vector<chain::ModelUpdate> candidates;
  double training_phase = 0.0;
  for (std::size_t w = 0; w < W; ++w) {
    if (!out.local[w]) {
      out.events.push_back("round " + std::to_string(r) + ": worker " + std::to_string(w) +
                           " has an empty shard, skipped");
      continue;
    }
    candidates.push_back(out.local[w]->update);
    training_phase = std::max(training_phase, out.local[w]->update.wall_time_s);
  }

  std::map<chain::DeviceId, double> latency;
  double comm_phase = 0.0;
  for (const DeviceState& d : devices_) {
    const double l = Rng::substream(cfg_.seed, Stream::Latency,
                                    {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(d.id)})
                         .exponential(cfg_.latency_mean_s);
    latency[d.id] = l;
    comm_phase = std::max(comm_phase, l);
  }

  std::vector<chain::DeviceId> miner_ids;
  for (const DeviceState& d : devices_) {
    if (d.role == Role::Miner) miner_ids.push_back(d.id);
  }
  const chain::StakeTable miner_stakes = stakes_.restricted_to(miner_ids);
  const double draw =
      Rng::substream(cfg_.seed, Stream::ValidatorDraw, {static_cast<std::uint64_t>(r)}).uniform();
  out.leader = chain::select_validator(miner_stakes, draw);

  // Every miner scores every candidate on its own copy of the validation
  // slice; only the leader's verdicts are committed.
  const chain::ValidationFn validation = [&](std::span<const double> params) {
    return model_->accuracy(params, validation_views_);
  };
  std::vector<std::vector<chain::UpdateVerdict>> miner_verdicts(miner_ids.size());
  parallel_for(miner_ids.size(), cfg_.threads, [&](std::size_t m) {
    for (const chain::ModelUpdate& u : candidates) {
      miner_verdicts[m].push_back(chain::validate_update(u, validation, cfg_.tau));
    }
  });
  const std::size_t leader_slot = static_cast<std::size_t>(
      std::find(miner_ids.begin(), miner_ids.end(), out.leader) - miner_ids.begin());
  out.verdicts = std::move(miner_verdicts[leader_slot]);
  std::vector<chain::ModelUpdate> accepted;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const chain::UpdateVerdict& v = out.verdicts[i];
    if (v.accepted) {
      accepted.push_back(candidates[i]);
    } else {
      out.events.push_back("round " + std::to_string(r) + ": update from worker " +
                           std::to_string(candidates[i].device_id) + " rejected (" + v.reason + ")");
    }
  }
  out.accepted = accepted.size();

  if (accepted.empty()) {
    for (std::size_t w = 0; w < W; ++w) devices_[w].params = previous[w];
    out.status = RoundStatus::Aborted;
    out.events.push_back("round " + std::to_string(r) + ": every update was rejected, round aborted");
    out.global_test_accuracy = test_accuracy();
    out.measured_seconds = seconds_since(started);
    ++round_;
    return out;
  }

  double t_create = cfg_.t_create_s;
  if (rc.measured_timing) {
    const auto t0 = Clock::now();
    chain::Block probe;
    probe.updates = accepted;
    (void)chain::compute_hash(probe);
    t_create = seconds_since(t0);
  }
  std::map<chain::DeviceId, double> per_miner_time;
  for (chain::DeviceId id : miner_ids) per_miner_time[id] = chain::block_time(t_create, latency[id]);
  out.block_time_s = per_miner_time[out.leader];
  out.expected_block_time_s = chain::expected_block_time(miner_stakes, per_miner_time);

  const double timestamp = clock_s_ + training_phase + comm_phase + out.block_time_s;
  const chain::Block& block = ledger_.append_block(accepted, out.leader, stakes_, timestamp);
  clock_s_ = timestamp;
  stakes_ = chain::apply_rewards(stakes_, block, {cfg_.reward_update, cfg_.reward_block});

  if (cfg_.mode == Mode::BqflInf) {
    std::vector<bool> kept(W, false);
    for (const chain::ModelUpdate& u : block.updates) kept[static_cast<std::size_t>(u.device_id)] = true;
    for (std::size_t w = 0; w < W; ++w) {
      if (!kept[w]) devices_[w].params = previous[w];
    }
  } else {
    // Every node averages the recorded updates on its own.
    std::vector<std::vector<double>> per_node;
    for (std::size_t i = 0; i < devices_.size(); ++i) per_node.push_back(fed_avg(block.updates));
    for (const auto& g : per_node) {
      if (g != per_node.front()) throw IntegrityError("nodes disagree on the aggregated model");
    }
    global_ = per_node.front();
  }

  // Worker metrics use the trained local model; the rest use the global
  // model or the ensemble.
  std::vector<double> local_test(W, 0.0);
  parallel_for(W, cfg_.threads, [&](std::size_t w) {
    local_test[w] = model_->accuracy(devices_[w].params, test_views_);
  });
  out.global_test_accuracy = test_accuracy();

  if (cfg_.mode != Mode::BqflInf) {
    for (DeviceState& d : devices_) d.params = global_;
  }

  double loss_sum = 0.0;
  double acc_sum = 0.0;
  double n_sum = 0.0;
  for (const chain::ModelUpdate& u : block.updates) {
    const double n = static_cast<double>(u.n_samples);
    loss_sum += n * u.train_loss;
    acc_sum += n * u.train_accuracy;
    n_sum += n;
  }

  for (std::size_t i = 0; i < devices_.size(); ++i) {
    const DeviceState& d = devices_[i];
    analytics::MetricsRow row;
    row.round = r;
    row.device_id = d.id;
    row.role = d.role;
    row.mode = cfg_.mode;
    row.comm_time_s = latency[d.id];
    row.stake = stakes_.stake(d.id);
    if (d.role == Role::Worker) {
      if (out.local[i]) {
        row.train_loss = out.local[i]->update.train_loss;
        row.train_acc = out.local[i]->update.train_accuracy;
      }
      row.test_acc_top1 = local_test[i];
      row.block_gen_time_s = out.block_time_s;
    } else {
      row.test_acc_top1 = out.global_test_accuracy;
      row.block_gen_time_s = per_miner_time[d.id];
    }
    out.rows.push_back(row);
  }
  analytics::MetricsRow global_row;
  global_row.round = r;
  global_row.device_id = -1;
  global_row.role = Role::Global;
  global_row.mode = cfg_.mode;
  global_row.train_loss = n_sum > 0.0 ? loss_sum / n_sum : 0.0;
  global_row.train_acc = n_sum > 0.0 ? acc_sum / n_sum : 0.0;
  global_row.test_acc_top1 = out.global_test_accuracy;
  global_row.comm_time_s = comm_phase;
  global_row.block_gen_time_s = out.block_time_s;
  global_row.stake = stakes_.total();
  out.rows.push_back(global_row);

  metrics_.insert(metrics_.end(), out.rows.begin(), out.rows.end());
  out.measured_seconds = seconds_since(started);
  ++round_;
  return out;
}

std::vector<RoundOutcome> Simulation::run_all() {
  std::vector<RoundOutcome> out;
  while (round_ < cfg_.rounds) {
    out.push_back(run_round());
    if (out.back().status == RoundStatus::Aborted) break;
  }
  return out;
}

}  // namespace bqfl::fed
