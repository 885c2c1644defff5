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

// Local Adam training, FedAvg and ensemble inference.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bqfl/chain.hpp"
#include "bqfl/classical.hpp"
#include "bqfl/types.hpp"
#include "bqfl/vqc.hpp"

namespace bqfl::fed {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  static AdamState zeros(std::size_t n) { return {std::vector<double>(n), std::vector<double>(n), 0}; }
  bool operator==(const AdamState&) const = default;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One bias-corrected Adam step in place. Throws DimensionError when the
/// params, grads and moment sizes differ.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr);

/// A trainable model family over flat parameter vectors.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t param_count() const = 0;
  virtual int n_classes() const = 0;
  virtual std::vector<double> initial_params(std::uint64_t seed) const = 0;
  virtual std::vector<double> predict(std::span<const double> params,
                                      std::span<const double> x) const = 0;
  virtual double loss(std::span<const double> params, BatchView batch) const = 0;
  /// Returns the batch loss and writes the gradient to `grad`.
  virtual double loss_and_grad(std::span<const double> params, BatchView batch,
                               std::span<double> grad) const = 0;
  /// Deterministic cost-model seconds for one forward pass and one
  /// gradient evaluation per sample.
  virtual double forward_seconds() const = 0;
  virtual double gradient_seconds() const = 0;

  double accuracy(std::span<const double> params, BatchView batch) const;
};

class QuantumModel final : public Model {
 public:
  QuantumModel(int n_qubits, int k_layers, vqc::ReadoutMode readout, double init_stddev,
               double t_gate_s);

  std::size_t param_count() const override;
  int n_classes() const override { return readout_.n_classes; }
  std::vector<double> initial_params(std::uint64_t seed) const override;
  std::vector<double> predict(std::span<const double> params,
                              std::span<const double> x) const override;
  double loss(std::span<const double> params, BatchView batch) const override;
  double loss_and_grad(std::span<const double> params, BatchView batch,
                       std::span<double> grad) const override;
  double forward_seconds() const override;
  double gradient_seconds() const override;

  const vqc::ReadoutMode& readout() const noexcept { return readout_; }
  vqc::CircuitParams circuit(std::span<const double> params) const;

 private:
  int n_qubits_;
  int k_layers_;
  vqc::ReadoutMode readout_;
  double init_stddev_;
  double t_gate_s_;
};

class ClassicalModel final : public Model {
 public:
  ClassicalModel(classical::MlpShape shape, double t_op_s);

  std::size_t param_count() const override { return shape_.param_count(); }
  int n_classes() const override { return shape_.n_classes; }
  std::vector<double> initial_params(std::uint64_t seed) const override;
  std::vector<double> predict(std::span<const double> params,
                              std::span<const double> x) const override;
  double loss(std::span<const double> params, BatchView batch) const override;
  double loss_and_grad(std::span<const double> params, BatchView batch,
                       std::span<double> grad) const override;
  double forward_seconds() const override;
  double gradient_seconds() const override;

  const classical::MlpShape& shape() const noexcept { return shape_; }

 private:
  classical::MlpShape shape_;
  double t_op_s_;
};

struct RoundConfig {
  int epochs = 5;
  std::size_t batch_size = 128;
  double learning_rate = 0.01;
  Mode mode = Mode::BqflAvg;
  std::uint64_t seed = 0;
  /// Report measured wall time instead of the model's cost estimate.
  bool measured_timing = false;

  void validate() const;
};

struct DeviceState {
  chain::DeviceId id = 0;
  Role role = Role::Worker;
  std::vector<double> params;
  /// Views into a dataset owned by the caller.
  std::vector<LabeledView> shard;
  AdamState optimizer;
};

struct LocalResult {
  chain::ModelUpdate update;
  /// Mean per-sample loss of each epoch, as seen during that epoch.
  std::vector<double> epoch_losses;
  double measured_seconds = 0.0;
};

/// Resets the device to `global_params` with fresh optimizer state, then
/// runs cfg.epochs shuffled passes of Adam. Returns nullopt for an empty
/// shard. Shuffling uses epoch index round * epochs + e.
std::optional<LocalResult> local_train(DeviceState& device, const Model& model,
                                       const RoundConfig& cfg,
                                       std::span<const double> global_params, int round);

/// Elementwise weighted mean with p_k = n_k / sum n_j. The result is
/// clamped to the elementwise input range, which only absorbs rounding.
std::vector<double> fed_avg(std::span<const chain::ModelUpdate> updates);

/// Weighted mean of raw parameter vectors, same rules as fed_avg.
std::vector<double> weighted_mean(std::span<const std::vector<double>> params,
                                  std::span<const std::int64_t> weights);

/// Per sample: uniform mean of each model's class probabilities, then argmax.
std::vector<int> fed_inference(const Model& model, std::span<const std::vector<double>> models,
                               std::span<const LabeledView> batch);

std::vector<int> fed_inference(std::span<const vqc::CircuitParams> models,
                               std::span<const LabeledView> batch, const vqc::ReadoutMode& mode);

double ensemble_accuracy(const Model& model, std::span<const std::vector<double>> models,
                         std::span<const LabeledView> batch);

/// Runs fn(i) for i < count on up to `threads` threads (0 = hardware).
/// The first exception thrown is rethrown after all tasks finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace bqfl::fed
