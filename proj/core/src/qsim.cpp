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

#include "bqfl/qsim.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "bqfl/error.hpp"

namespace bqfl::qsim {
namespace {

void check_qubit_count(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw DimensionError("qubit count " + std::to_string(n_qubits) + " outside 1.." +
                         std::to_string(kMaxQubits));
  }
}

void check_qubit(int qubit, int n_qubits, const char* what) {
  if (qubit < 0 || qubit >= n_qubits) {
    throw DimensionError(std::string(what) + " qubit " + std::to_string(qubit) +
                         " out of range for " + std::to_string(n_qubits) + " qubits");
  }
}

}  // namespace

StateVector StateVector::basis(int n_qubits, std::size_t index) {
  check_qubit_count(n_qubits);
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (index >= dim) throw DimensionError("basis index out of range");
  std::vector<Amplitude> amplitudes(dim);
  amplitudes[index] = 1.0;
  return StateVector(n_qubits, std::move(amplitudes));
}

StateVector StateVector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    throw DimensionError("amplitude count " + std::to_string(dim) + " is not a power of two");
  }
  int n_qubits = 0;
  while ((std::size_t{1} << n_qubits) < dim) ++n_qubits;
  check_qubit_count(n_qubits);
  StateVector state(n_qubits, std::move(amplitudes));
  if (std::abs(state.norm() - 1.0) > 1e-10) {
    throw ArgumentError("amplitudes are not unit norm");
  }
  return state;
}

double StateVector::norm() const {
  double sum = 0.0;
  for (const Amplitude& a : amplitudes_) sum += std::norm(a);
  return std::sqrt(sum);
}

void StateVector::apply_rotation(int target, const Amplitude (&m)[2][2]) {
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t dim = amplitudes_.size();
  for (std::size_t block = 0; block < dim; block += 2 * stride) {
    for (std::size_t offset = 0; offset < stride; ++offset) {
      const std::size_t i0 = block + offset;
      const std::size_t i1 = i0 + stride;
      const Amplitude a0 = amplitudes_[i0];
      const Amplitude a1 = amplitudes_[i1];
      amplitudes_[i0] = m[0][0] * a0 + m[0][1] * a1;
      amplitudes_[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
  }
}

void StateVector::apply(const GateSpec& gate) {
  check_qubit(gate.target, n_qubits_, "target");
  switch (gate.kind) {
    case GateKind::RotX: {
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      const Amplitude m[2][2] = {{{c, 0.0}, {0.0, -s}}, {{0.0, -s}, {c, 0.0}}};
      apply_rotation(gate.target, m);
      break;
    }
    case GateKind::RotZ: {
      // Diagonal; touch each amplitude once.
      const Amplitude phase0 = std::polar(1.0, -gate.angle / 2.0);
      const Amplitude phase1 = std::polar(1.0, gate.angle / 2.0);
      for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        amplitudes_[i] *= ((i >> gate.target) & 1U) != 0U ? phase1 : phase0;
      }
      break;
    }
    case GateKind::CNot: {
      if (!gate.control) throw DimensionError("CNot requires a control qubit");
      const int control = *gate.control;
      check_qubit(control, n_qubits_, "control");
      if (control == gate.target) throw DimensionError("CNot control equals target");
      const std::size_t cmask = std::size_t{1} << control;
      const std::size_t tmask = std::size_t{1} << gate.target;
      for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        // Visit each swapped pair once, from its target-bit-0 member.
        if ((i & cmask) != 0U && (i & tmask) == 0U) {
          std::swap(amplitudes_[i], amplitudes_[i | tmask]);
        }
      }
      break;
    }
  }
}

EncodedState amplitude_encode(std::span<const double> data, int n_qubits) {
  check_qubit_count(n_qubits);
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (data.size() != dim) {
    throw DimensionError("encode: data length " + std::to_string(data.size()) +
                         " != 2^" + std::to_string(n_qubits));
  }
  double sum = 0.0;
  for (double v : data) sum += v * v;
  if (sum == 0.0) return {StateVector::basis(n_qubits, 0), true};
  const double inv = 1.0 / std::sqrt(sum);
  std::vector<Amplitude> amplitudes(dim);
  for (std::size_t i = 0; i < dim; ++i) amplitudes[i] = data[i] * inv;
  return {StateVector::from_amplitudes(std::move(amplitudes)), false};
}

StateVector apply_gate(StateVector state, const GateSpec& gate) {
  state.apply(gate);
  return state;
}

std::vector<double> basis_probabilities(const StateVector& state) {
  std::vector<double> probs(state.dim());
  for (std::size_t i = 0; i < state.dim(); ++i) probs[i] = std::norm(state[i]);
  return probs;
}

double expect_z(const StateVector& state, int qubit) {
  check_qubit(qubit, state.n_qubits(), "observable");
  double value = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) value += z_sign(i, qubit) * std::norm(state[i]);
  return value;
}

}  // namespace bqfl::qsim
