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

#include "bqfl/fed.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "bqfl/data.hpp"
#include "bqfl/error.hpp"
#include "bqfl/rng.hpp"

namespace bqfl::fed {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam_step: params, grads and moments must have equal size");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grads[i];
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
}

double Model::accuracy(std::span<const double> params, BatchView batch) const {
  if (batch.empty()) return 0.0;
  std::size_t hits = 0;
  for (const LabeledView& s : batch) {
    if (static_cast<int>(argmax(predict(params, s.x))) == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

QuantumModel::QuantumModel(int n_qubits, int k_layers, vqc::ReadoutMode readout,
                           double init_stddev, double t_gate_s)
    : n_qubits_(n_qubits),
      k_layers_(k_layers),
      readout_(readout),
      init_stddev_(init_stddev),
      t_gate_s_(t_gate_s) {
  readout_.validate(n_qubits_);
}

std::size_t QuantumModel::param_count() const {
  return static_cast<std::size_t>(3 * k_layers_ * n_qubits_);
}

vqc::CircuitParams QuantumModel::circuit(std::span<const double> params) const {
  return vqc::CircuitParams::from_values(k_layers_, n_qubits_, {params.begin(), params.end()});
}

std::vector<double> QuantumModel::initial_params(std::uint64_t seed) const {
  Rng rng = Rng::substream(seed, Stream::ModelInit, {});
  const auto p = vqc::CircuitParams::random_normal(k_layers_, n_qubits_, rng, init_stddev_);
  return {p.values().begin(), p.values().end()};
}

std::vector<double> QuantumModel::predict(std::span<const double> params,
                                          std::span<const double> x) const {
  return vqc::predict(circuit(params), x, readout_);
}

double QuantumModel::loss(std::span<const double> params, BatchView batch) const {
  return vqc::loss_nll(circuit(params), batch, readout_);
}

double QuantumModel::loss_and_grad(std::span<const double> params, BatchView batch,
                                   std::span<double> grad) const {
  if (grad.size() != params.size()) throw DimensionError("QuantumModel: gradient size mismatch");
  const vqc::LossAndGrad r = vqc::loss_and_grad(circuit(params), batch, readout_);
  std::copy(r.grad.values().begin(), r.grad.values().end(), grad.begin());
  return r.loss;
}

// One sample: amplitude encoding (dim * n gate times) plus every circuit
// gate touching the full state.
double QuantumModel::forward_seconds() const {
  const double dim = std::ldexp(1.0, n_qubits_);
  const double gates = static_cast<double>(k_layers_) * (4 * n_qubits_ - 1);
  return (dim * n_qubits_ + gates * dim) * t_gate_s_;
}

// Parameter shift: two shifted circuits per parameter plus the forward pass.
double QuantumModel::gradient_seconds() const {
  return (1.0 + 2.0 * static_cast<double>(param_count())) * forward_seconds();
}

ClassicalModel::ClassicalModel(classical::MlpShape shape, double t_op_s)
    : shape_(shape), t_op_s_(t_op_s) {}

std::vector<double> ClassicalModel::initial_params(std::uint64_t seed) const {
  Rng rng = Rng::substream(seed, Stream::ModelInit, {});
  const auto p = classical::MlpParams::init_uniform(shape_, rng);
  return {p.flat().begin(), p.flat().end()};
}

std::vector<double> ClassicalModel::predict(std::span<const double> params,
                                            std::span<const double> x) const {
  return classical::mlp_forward(classical::MlpParams::from_flat(shape_, {params.begin(), params.end()}),
                                x);
}

double ClassicalModel::loss(std::span<const double> params, BatchView batch) const {
  return classical::mlp_loss(classical::MlpParams::from_flat(shape_, {params.begin(), params.end()}),
                             batch);
}

double ClassicalModel::loss_and_grad(std::span<const double> params, BatchView batch,
                                     std::span<double> grad) const {
  if (grad.size() != params.size()) throw DimensionError("ClassicalModel: gradient size mismatch");
  const auto r = classical::mlp_loss_and_grad(
      classical::MlpParams::from_flat(shape_, {params.begin(), params.end()}), batch);
  std::copy(r.grad.flat().begin(), r.grad.flat().end(), grad.begin());
  return r.loss;
}

double ClassicalModel::forward_seconds() const {
  return static_cast<double>(shape_.param_count()) * t_op_s_;
}

double ClassicalModel::gradient_seconds() const { return 3.0 * forward_seconds(); }

void RoundConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
}

std::optional<LocalResult> local_train(DeviceState& device, const Model& model,
                                       const RoundConfig& cfg,
                                       std::span<const double> global_params, int round) {
  cfg.validate();
  if (global_params.size() != model.param_count()) {
    throw DimensionError("local_train: global params do not match the model");
  }
  if (device.shard.empty()) return std::nullopt;

  const auto started = std::chrono::steady_clock::now();
  device.params.assign(global_params.begin(), global_params.end());
  device.optimizer = AdamState::zeros(device.params.size());

  const std::size_t n = device.shard.size();
  std::vector<double> grad(device.params.size());
  std::vector<LabeledView> batch;
  LocalResult out;
  for (int e = 0; e < cfg.epochs; ++e) {
    double loss_sum = 0.0;
    const auto order = data::batches(n, cfg.batch_size, cfg.seed, static_cast<int>(device.id),
                                     round * cfg.epochs + e);
    for (const auto& indices : order) {
      batch.clear();
      for (std::size_t i : indices) batch.push_back(device.shard[i]);
      const double loss = model.loss_and_grad(device.params, batch, grad);
      loss_sum += loss * static_cast<double>(batch.size());
      adam_step(device.params, grad, device.optimizer, cfg.learning_rate);
    }
    out.epoch_losses.push_back(loss_sum / static_cast<double>(n));
  }

  const auto finished = std::chrono::steady_clock::now();
  out.measured_seconds = std::chrono::duration<double>(finished - started).count();

  chain::ModelUpdate& u = out.update;
  u.device_id = device.id;
  u.round = round;
  u.params = device.params;
  u.n_samples = static_cast<std::int64_t>(n);
  u.train_loss = out.epoch_losses.back();
  u.train_accuracy = model.accuracy(device.params, device.shard);
  const double steps_per_sample = static_cast<double>(cfg.epochs);
  u.wall_time_s = cfg.measured_timing
                      ? out.measured_seconds
                      : static_cast<double>(n) * (steps_per_sample * model.gradient_seconds() +
                                                  model.forward_seconds());
  return out;
}

std::vector<double> weighted_mean(std::span<const std::vector<double>> params,
                                  std::span<const std::int64_t> weights) {
  if (params.empty()) throw ArgumentError("fed_avg: no updates");
  if (weights.size() != params.size()) throw DimensionError("fed_avg: one weight per update");
  const std::size_t dim = params.front().size();
  double total = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != dim) throw DimensionError("fed_avg: parameter shapes differ");
    if (weights[k] < 0) throw ArgumentError("fed_avg: negative sample count");
    total += static_cast<double>(weights[k]);
  }
  if (!(total > 0.0)) throw ArgumentError("fed_avg: total sample count is zero");

  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    double acc = 0.0;
    double lo = params[0][i];
    double hi = params[0][i];
    for (std::size_t k = 0; k < params.size(); ++k) {
      acc += static_cast<double>(weights[k]) * params[k][i];
      lo = std::min(lo, params[k][i]);
      hi = std::max(hi, params[k][i]);
    }
    out[i] = std::clamp(acc / total, lo, hi);
  }
  return out;
}

std::vector<double> fed_avg(std::span<const chain::ModelUpdate> updates) {
  std::vector<std::vector<double>> params;
  std::vector<std::int64_t> weights;
  params.reserve(updates.size());
  for (const chain::ModelUpdate& u : updates) {
    params.push_back(u.params);
    weights.push_back(u.n_samples);
  }
  return weighted_mean(params, weights);
}

namespace {

template <typename Predict>
std::vector<int> ensemble_predict(std::size_t n_models, std::span<const LabeledView> batch,
                                  Predict&& predict) {
  if (n_models == 0) throw ArgumentError("fed_inference: empty model list");
  std::vector<int> out;
  out.reserve(batch.size());
  for (const LabeledView& s : batch) {
    std::vector<double> mean;
    for (std::size_t k = 0; k < n_models; ++k) {
      const std::vector<double> p = predict(k, s.x);
      if (mean.empty()) mean.assign(p.size(), 0.0);
      if (p.size() != mean.size()) throw DimensionError("fed_inference: class counts differ");
      for (std::size_t c = 0; c < p.size(); ++c) mean[c] += p[c];
    }
    for (double& v : mean) v /= static_cast<double>(n_models);
    out.push_back(static_cast<int>(argmax(mean)));
  }
  return out;
}

}  // namespace

std::vector<int> fed_inference(const Model& model, std::span<const std::vector<double>> models,
                               std::span<const LabeledView> batch) {
  return ensemble_predict(models.size(), batch, [&](std::size_t k, std::span<const double> x) {
    return model.predict(models[k], x);
  });
}

std::vector<int> fed_inference(std::span<const vqc::CircuitParams> models,
                               std::span<const LabeledView> batch, const vqc::ReadoutMode& mode) {
  return ensemble_predict(models.size(), batch, [&](std::size_t k, std::span<const double> x) {
    return vqc::predict(models[k], x, mode);
  });
}

double ensemble_accuracy(const Model& model, std::span<const std::vector<double>> models,
                         std::span<const LabeledView> batch) {
  if (batch.empty()) return 0.0;
  const std::vector<int> pred = fed_inference(model, models, batch);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (pred[i] == batch[i].label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t n_threads = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace bqfl::fed
