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

// Layered variational classifier over the qsim engine.
//
// Each layer j applies a CNOT chain over neighbouring qubits (i -> i+1),
// then per qubit i: RotX(values[3j, i]), RotZ(values[3j+1, i]),
// RotX(values[3j+2, i]).

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bqfl/qsim.hpp"
#include "bqfl/rng.hpp"
#include "bqfl/types.hpp"

namespace bqfl::vqc {

/// Rotation angles, shape [3 * k_layers, n_qubits], row-major.
class CircuitParams {
 public:
  static CircuitParams zeros(int k_layers, int n_qubits);
  static CircuitParams from_values(int k_layers, int n_qubits, std::vector<double> values);
  /// i.i.d. normal(0, stddev) entries.
  static CircuitParams random_normal(int k_layers, int n_qubits, Rng& rng, double stddev = 0.1);

  int k_layers() const noexcept { return k_layers_; }
  int n_qubits() const noexcept { return n_qubits_; }
  int rows() const noexcept { return 3 * k_layers_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int row, int qubit) const { return values_[index(row, qubit)]; }
  double& at(int row, int qubit) { return values_[index(row, qubit)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool operator==(const CircuitParams&) const = default;

 private:
  CircuitParams(int k_layers, int n_qubits, std::vector<double> values)
      : k_layers_(k_layers), n_qubits_(n_qubits), values_(std::move(values)) {}

  std::size_t index(int row, int qubit) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(n_qubits_) +
           static_cast<std::size_t>(qubit);
  }

  int k_layers_;
  int n_qubits_;
  std::vector<double> values_;
};

enum class Readout { Softmax, Sample };

struct ReadoutMode {
  Readout kind = Readout::Softmax;
  int n_classes = 2;

  /// Softmax needs n_classes <= n_qubits; Sample needs n_classes <= 2^n.
  void validate(int n_qubits) const;
};

/// The circuit as an explicit gate list. Entry g carries `param_index`
/// (row-major into CircuitParams) for rotations and -1 for CNOTs.
struct CircuitGate {
  qsim::GateSpec gate;
  int param_index = -1;
};
std::vector<CircuitGate> clf_gates(const CircuitParams& params);

qsim::StateVector clf_apply(qsim::StateVector state, const CircuitParams& params);

/// Softmax: softmax over <Z_c> for c < C. Sample: basis probabilities of
/// states 0..C-1 renormalized; uniform 1/C when their mass is < 1e-12.
std::vector<double> readout(const qsim::StateVector& state, const ReadoutMode& mode);

/// True when Sample-mode renormalization would fall back to uniform.
bool sample_mass_degenerate(const qsim::StateVector& state, const ReadoutMode& mode);

/// Class probabilities for one feature vector.
std::vector<double> predict(const CircuitParams& params, std::span<const double> x,
                            const ReadoutMode& mode);

/// Mean of -ln(max(p_true, 1e-12)) over the batch.
double loss_nll(const CircuitParams& params, BatchView batch, const ReadoutMode& mode);

double accuracy(const CircuitParams& params, BatchView batch, const ReadoutMode& mode);

struct LossAndGrad {
  double loss = 0.0;
  CircuitParams grad;
  /// Samples whose Sample-mode readout hit the uniform fallback.
  std::size_t degenerate = 0;
};

/// Exact gradient of loss_nll: every observable partial comes from the
/// +-pi/2 parameter-shift rule and is chained analytically through the
/// readout and the log-likelihood.
LossAndGrad loss_and_grad(const CircuitParams& params, BatchView batch, const ReadoutMode& mode);

CircuitParams grad_parameter_shift(const CircuitParams& params, BatchView batch,
                                   const ReadoutMode& mode);

/// Central differences (loss(p + h) - loss(p - h)) / 2h per parameter.
CircuitParams grad_finite_diff(const CircuitParams& params, BatchView batch,
                               const ReadoutMode& mode, double h);

/// Central-difference gradient of an arbitrary scalar function.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double h);

}  // namespace bqfl::vqc
