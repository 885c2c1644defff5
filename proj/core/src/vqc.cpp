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

#include "bqfl/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bqfl/error.hpp"

namespace bqfl::vqc {
namespace {

constexpr double kDegenerateMass = 1e-12;

void check_batch(BatchView batch) {
  if (batch.empty()) throw ArgumentError("batch must be nonempty");
}

void check_label(int label, const ReadoutMode& mode) {
  if (label < 0 || label >= mode.n_classes) {
    throw ArgumentError("label " + std::to_string(label) + " outside 0.." +
                        std::to_string(mode.n_classes - 1));
  }
}

/// Raw observables the readout is built from: <Z_c> (Softmax) or the
/// probability of basis state c (Sample), for c < n_classes.
std::vector<double> observables(const qsim::StateVector& state, const ReadoutMode& mode) {
  std::vector<double> out(static_cast<std::size_t>(mode.n_classes));
  if (mode.kind == Readout::Softmax) {
    for (int c = 0; c < mode.n_classes; ++c) out[c] = qsim::expect_z(state, c);
  } else {
    for (int c = 0; c < mode.n_classes; ++c) out[c] = std::norm(state[static_cast<std::size_t>(c)]);
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> probabilities_from(std::span<const double> obs, const ReadoutMode& mode) {
  if (mode.kind == Readout::Softmax) return softmax(obs);
  double mass = 0.0;
  for (double v : obs) mass += v;
  std::vector<double> out(obs.size());
  if (mass < kDegenerateMass) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(obs.size()));
    return out;
  }
  for (std::size_t i = 0; i < obs.size(); ++i) out[i] = obs[i] / mass;
  return out;
}

qsim::StateVector encode(std::span<const double> x, int n_qubits) {
  return qsim::amplitude_encode(x, n_qubits).state;
}

void check_shapes(const CircuitParams& params, std::span<const double> x) {
  if ((std::size_t{1} << params.n_qubits()) != x.size()) {
    throw DimensionError("feature length " + std::to_string(x.size()) +
                         " does not match 2^" + std::to_string(params.n_qubits()));
  }
}

/// d loss / d observable for one sample. Empty when the loss is locally
/// constant (clamped probability or degenerate renormalization).
std::vector<double> loss_sensitivity(std::span<const double> obs, std::span<const double> probs,
                                     int label, const ReadoutMode& mode) {
  const auto y = static_cast<std::size_t>(label);
  if (probs[y] < kProbabilityClamp) return {};
  std::vector<double> d(obs.size());
  if (mode.kind == Readout::Softmax) {
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = probs[c] - (c == y ? 1.0 : 0.0);
    return d;
  }
  double mass = 0.0;
  for (double v : obs) mass += v;
  if (mass < kDegenerateMass) return {};
  // loss = -ln o_y + ln sum_c o_c
  for (std::size_t c = 0; c < d.size(); ++c) d[c] = 1.0 / mass;
  d[y] -= 1.0 / obs[y];
  return d;
}

}  // namespace

CircuitParams CircuitParams::zeros(int k_layers, int n_qubits) {
  if (k_layers < 0 || n_qubits < 1) throw DimensionError("CircuitParams: invalid shape");
  return CircuitParams(k_layers, n_qubits,
                       std::vector<double>(static_cast<std::size_t>(3 * k_layers * n_qubits)));
}

CircuitParams CircuitParams::from_values(int k_layers, int n_qubits, std::vector<double> values) {
  if (k_layers < 0 || n_qubits < 1 ||
      values.size() != static_cast<std::size_t>(3 * k_layers * n_qubits)) {
    throw DimensionError("CircuitParams: expected " + std::to_string(3 * k_layers * n_qubits) +
                         " values, got " + std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("CircuitParams: non-finite entry");
  }
  return CircuitParams(k_layers, n_qubits, std::move(values));
}

CircuitParams CircuitParams::random_normal(int k_layers, int n_qubits, Rng& rng, double stddev) {
  CircuitParams params = zeros(k_layers, n_qubits);
  for (double& v : params.values_) v = rng.normal(0.0, stddev);
  return params;
}

void ReadoutMode::validate(int n_qubits) const {
  if (n_classes < 1) throw ArgumentError("readout: n_classes must be positive");
  if (kind == Readout::Softmax && n_classes > n_qubits) {
    throw ArgumentError("softmax readout needs n_classes <= n_qubits (" +
                        std::to_string(n_classes) + " > " + std::to_string(n_qubits) + ")");
  }
  if (kind == Readout::Sample && n_qubits < 31 &&
      static_cast<long long>(n_classes) > (1LL << n_qubits)) {
    throw ArgumentError("sample readout needs n_classes <= 2^n_qubits");
  }
}

std::vector<CircuitGate> clf_gates(const CircuitParams& params) {
  const int n = params.n_qubits();
  std::vector<CircuitGate> gates;
  gates.reserve(static_cast<std::size_t>(params.k_layers() * (n - 1 + 3 * n)));
  for (int j = 0; j < params.k_layers(); ++j) {
    for (int i = 0; i + 1 < n; ++i) gates.push_back({qsim::GateSpec::cnot(i, i + 1), -1});
    for (int i = 0; i < n; ++i) {
      const int r0 = 3 * j;
      gates.push_back({qsim::GateSpec::rot_x(i, params.at(r0, i)), r0 * n + i});
      gates.push_back({qsim::GateSpec::rot_z(i, params.at(r0 + 1, i)), (r0 + 1) * n + i});
      gates.push_back({qsim::GateSpec::rot_x(i, params.at(r0 + 2, i)), (r0 + 2) * n + i});
    }
  }
  return gates;
}

qsim::StateVector clf_apply(qsim::StateVector state, const CircuitParams& params) {
  if (state.n_qubits() != params.n_qubits()) {
    throw DimensionError("clf_apply: params built for " + std::to_string(params.n_qubits()) +
                         " qubits, state has " + std::to_string(state.n_qubits()));
  }
  for (const CircuitGate& g : clf_gates(params)) state.apply(g.gate);
  return state;
}

std::vector<double> readout(const qsim::StateVector& state, const ReadoutMode& mode) {
  mode.validate(state.n_qubits());
  return probabilities_from(observables(state, mode), mode);
}

bool sample_mass_degenerate(const qsim::StateVector& state, const ReadoutMode& mode) {
  if (mode.kind != Readout::Sample) return false;
  double mass = 0.0;
  for (double v : observables(state, mode)) mass += v;
  return mass < kDegenerateMass;
}

std::vector<double> predict(const CircuitParams& params, std::span<const double> x,
                            const ReadoutMode& mode) {
  check_shapes(params, x);
  return readout(clf_apply(encode(x, params.n_qubits()), params), mode);
}

double loss_nll(const CircuitParams& params, BatchView batch, const ReadoutMode& mode) {
  check_batch(batch);
  double total = 0.0;
  for (const LabeledView& sample : batch) {
    check_label(sample.label, mode);
    const std::vector<double> p = predict(params, sample.x, mode);
    total += -std::log(std::max(p[static_cast<std::size_t>(sample.label)], kProbabilityClamp));
  }
  return total / static_cast<double>(batch.size());
}

double accuracy(const CircuitParams& params, BatchView batch, const ReadoutMode& mode) {
  check_batch(batch);
  std::size_t correct = 0;
  for (const LabeledView& sample : batch) {
    const std::vector<double> p = predict(params, sample.x, mode);
    if (argmax(p) == static_cast<std::size_t>(sample.label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

LossAndGrad loss_and_grad(const CircuitParams& params, BatchView batch, const ReadoutMode& mode) {
  check_batch(batch);
  mode.validate(params.n_qubits());
  const std::vector<CircuitGate> gates = clf_gates(params);
  constexpr double kShift = std::numbers::pi / 2.0;

  LossAndGrad out{0.0, CircuitParams::zeros(params.k_layers(), params.n_qubits()), 0};
  std::span<double> grad = out.grad.values();

  std::vector<qsim::StateVector> prefix;
  prefix.reserve(gates.size() + 1);
  for (const LabeledView& sample : batch) {
    check_label(sample.label, mode);
    check_shapes(params, sample.x);
    prefix.clear();
    prefix.push_back(encode(sample.x, params.n_qubits()));
    for (const CircuitGate& g : gates) prefix.push_back(qsim::apply_gate(prefix.back(), g.gate));

    const std::vector<double> obs = observables(prefix.back(), mode);
    const std::vector<double> probs = probabilities_from(obs, mode);
    if (mode.kind == Readout::Sample) {
      double mass = 0.0;
      for (double v : obs) mass += v;
      if (mass < kDegenerateMass) ++out.degenerate;
    }
    out.loss += -std::log(std::max(probs[static_cast<std::size_t>(sample.label)], kProbabilityClamp));

    const std::vector<double> sensitivity = loss_sensitivity(obs, probs, sample.label, mode);
    if (sensitivity.empty()) continue;

    for (std::size_t g = 0; g < gates.size(); ++g) {
      if (gates[g].param_index < 0) continue;
      // Same-axis rotations compose additively, so shifting the angle is an
      // extra +-pi/2 rotation right after gate g.
      const auto shifted_obs = [&](double shift) {
        qsim::GateSpec extra = gates[g].gate;
        extra.angle = shift;
        qsim::StateVector state = qsim::apply_gate(prefix[g + 1], extra);
        for (std::size_t rest = g + 1; rest < gates.size(); ++rest) state.apply(gates[rest].gate);
        return observables(state, mode);
      };
      const std::vector<double> plus = shifted_obs(kShift);
      const std::vector<double> minus = shifted_obs(-kShift);
      double partial = 0.0;
      for (std::size_t c = 0; c < sensitivity.size(); ++c) {
        partial += sensitivity[c] * 0.5 * (plus[c] - minus[c]);
      }
      grad[static_cast<std::size_t>(gates[g].param_index)] += partial;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (double& v : grad) v *= inv;
  return out;
}

CircuitParams grad_parameter_shift(const CircuitParams& params, BatchView batch,
                                   const ReadoutMode& mode) {
  return loss_and_grad(params, batch, mode).grad;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite difference step must be positive");
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = point[i];
    point[i] = original + h;
    const double up = f(point);
    point[i] = original - h;
    const double down = f(point);
    point[i] = original;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

CircuitParams grad_finite_diff(const CircuitParams& params, BatchView batch,
                               const ReadoutMode& mode, double h) {
  check_batch(batch);
  const auto f = [&](std::span<const double> values) {
    return loss_nll(CircuitParams::from_values(params.k_layers(), params.n_qubits(),
                                               {values.begin(), values.end()}),
                    batch, mode);
  };
  return CircuitParams::from_values(params.k_layers(), params.n_qubits(),
                                    central_difference(f, params.values(), h));
}

}  // namespace bqfl::vqc
