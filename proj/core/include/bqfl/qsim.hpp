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

// Dense statevector simulation for the RotX / RotZ / CNOT gate set.
//
// Qubit ordering is little-endian: basis index b holds qubit q in bit
// (b >> q) & 1, so a flattened image index is directly an amplitude index.
// Rotations follow RotX(t) = exp(-i t X / 2), RotZ(t) = exp(-i t Z / 2).

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bqfl::qsim {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 12;

enum class GateKind { RotX, RotZ, CNot };

struct GateSpec {
  GateKind kind = GateKind::RotX;
  int target = 0;
  std::optional<int> control;
  double angle = 0.0;

  static GateSpec rot_x(int target, double angle) { return {GateKind::RotX, target, {}, angle}; }
  static GateSpec rot_z(int target, double angle) { return {GateKind::RotZ, target, {}, angle}; }
  static GateSpec cnot(int control, int target) { return {GateKind::CNot, target, control, 0.0}; }
};

class StateVector {
 public:
  /// Computational basis state |index> on n qubits.
  static StateVector basis(int n_qubits, std::size_t index = 0);

  /// Adopts an amplitude array; its length must be a power of two and its
  /// norm 1 within 1e-10.
  static StateVector from_amplitudes(std::vector<Amplitude> amplitudes);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const noexcept { return amplitudes_; }
  const Amplitude& operator[](std::size_t i) const { return amplitudes_[i]; }

  /// Euclidean norm of the amplitude vector.
  double norm() const;

  /// Applies a gate in place. Throws DimensionError on invalid indices.
  void apply(const GateSpec& gate);

 private:
  StateVector(int n_qubits, std::vector<Amplitude> amplitudes)
      : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

  void apply_rotation(int target, const Amplitude (&m)[2][2]);

  int n_qubits_;
  std::vector<Amplitude> amplitudes_;
};

struct EncodedState {
  StateVector state;
  /// True when the input was all zeros and the basis-0 state was returned.
  bool fallback = false;
};

/// Loads data[i] / ||data||_2 into amplitude i. `data` must have length 2^n.
EncodedState amplitude_encode(std::span<const double> data, int n_qubits);

/// Pure form of StateVector::apply.
StateVector apply_gate(StateVector state, const GateSpec& gate);

std::vector<double> basis_probabilities(const StateVector& state);

/// <Z_q> = sum_i s(i, q) |a_i|^2 with s = +1 when bit q of i is 0, else -1.
double expect_z(const StateVector& state, int qubit);

/// Sign of the Z eigenvalue of basis index `index` on `qubit`.
constexpr double z_sign(std::size_t index, int qubit) {
  return ((index >> qubit) & 1U) != 0U ? -1.0 : 1.0;
}

}  // namespace bqfl::qsim
