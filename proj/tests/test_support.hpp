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

// Independent reference implementations and fixtures shared by the unit and
// acceptance tests. Nothing here calls into the code under test except to
// build inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bqfl/data.hpp"
#include "bqfl/types.hpp"

namespace bqfl::testing {

using cplx = std::complex<double>;

/// Dense row-major complex matrix.
struct Dense {
  std::size_t n = 0;
  std::vector<cplx> a;

  static Dense identity(std::size_t n) {
    Dense d{n, std::vector<cplx>(n * n)};
    for (std::size_t i = 0; i < n; ++i) d.a[i * n + i] = 1.0;
    return d;
  }
  cplx operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }
  cplx& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
};

inline Dense matmul(const Dense& x, const Dense& y) {
  Dense out{x.n, std::vector<cplx>(x.n * x.n)};
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.n; ++k)
      for (std::size_t j = 0; j < x.n; ++j) out(i, j) += x(i, k) * y(k, j);
  return out;
}

inline Dense kron(const Dense& x, const Dense& y) {
  Dense out{x.n * y.n, std::vector<cplx>(x.n * y.n * x.n * y.n)};
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j)
      for (std::size_t k = 0; k < y.n; ++k)
        for (std::size_t l = 0; l < y.n; ++l) out(i * y.n + k, j * y.n + l) = x(i, j) * y(k, l);
  return out;
}

inline Dense rx2(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {2, {c, cplx(0, -s), cplx(0, -s), c}};
}

inline Dense rz2(double theta) {
  return {2, {std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2)}};
}

/// Embeds a one-qubit matrix on `target` of n qubits. Qubit q is bit q of
/// the basis index, so the Kronecker order runs from qubit n-1 down to 0.
inline Dense embed(const Dense& m, int target, int n) {
  Dense out = Dense::identity(1);
  for (int q = n - 1; q >= 0; --q) out = kron(out, q == target ? m : Dense::identity(2));
  return out;
}

/// CNOT = |0><0|_c (x) I + |1><1|_c (x) X_t, built from projectors.
inline Dense cnot_dense(int control, int target, int n) {
  const Dense p0{2, {1.0, 0.0, 0.0, 0.0}};
  const Dense p1{2, {0.0, 0.0, 0.0, 1.0}};
  const Dense x{2, {0.0, 1.0, 1.0, 0.0}};
  Dense a = Dense::identity(1), b = Dense::identity(1);
  for (int q = n - 1; q >= 0; --q) {
    a = kron(a, q == control ? p0 : Dense::identity(2));
    b = kron(b, q == control ? p1 : (q == target ? x : Dense::identity(2)));
  }
  for (std::size_t i = 0; i < a.a.size(); ++i) a.a[i] += b.a[i];
  return a;
}

/// Full classifier unitary: per layer j, CNOT chain then RX, RZ, RX per
/// qubit with angles theta[(3j + r) * n + q].
inline Dense classifier_unitary(const std::vector<double>& theta, int k_layers, int n) {
  Dense u = Dense::identity(std::size_t{1} << n);
  const auto apply = [&](const Dense& g) { u = matmul(g, u); };
  for (int j = 0; j < k_layers; ++j) {
    for (int i = 0; i + 1 < n; ++i) apply(cnot_dense(i, i + 1, n));
    for (int i = 0; i < n; ++i) {
      apply(embed(rx2(theta[(3 * j + 0) * n + i]), i, n));
      apply(embed(rz2(theta[(3 * j + 1) * n + i]), i, n));
      apply(embed(rx2(theta[(3 * j + 2) * n + i]), i, n));
    }
  }
  return u;
}

inline std::vector<cplx> apply_dense(const Dense& u, const std::vector<cplx>& v) {
  std::vector<cplx> out(u.n);
  for (std::size_t i = 0; i < u.n; ++i)
    for (std::size_t j = 0; j < u.n; ++j) out[i] += u(i, j) * v[j];
  return out;
}

/// Reference class probabilities from a final state, written out longhand.
inline std::vector<double> reference_readout(const std::vector<cplx>& psi, int n, int n_classes,
                                             bool sample) {
  std::vector<double> probs(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) probs[i] = std::norm(psi[i]);
  std::vector<double> out(static_cast<std::size_t>(n_classes));
  if (sample) {
    double mass = 0.0;
    for (int c = 0; c < n_classes; ++c) mass += probs[c];
    for (int c = 0; c < n_classes; ++c) out[c] = mass < 1e-12 ? 1.0 / n_classes : probs[c] / mass;
    return out;
  }
  std::vector<double> z(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < probs.size(); ++i) z[c] += (((i >> c) & 1) ? -1.0 : 1.0) * probs[i];
  }
  (void)n;
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (int c = 0; c < n_classes; ++c) sum += (out[c] = std::exp(z[c] - mx));
  for (double& v : out) v /= sum;
  return out;
}

/// Scalar Adam written independently of the library.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  long t = 0;
  double step(double theta, double g, double lr) {
    ++t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
    const double vh = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
    return theta - lr * mh / (std::sqrt(vh) + 1e-8);
  }
};

/// Synthetic IDX-style dataset: `per_class` images of each listed label.
/// Each class lights a different block of pixels so models can learn it.
inline data::RawDataset synthetic_dataset(const std::vector<int>& labels, int per_class,
                                          std::uint64_t seed, int side = 28) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> noise(0, 40);
  data::RawDataset ds;
  ds.rows = side;
  ds.cols = side;
  for (int i = 0; i < per_class; ++i) {
    for (int label : labels) {
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const int block = (r * 4 / side) * 4 + (c * 4 / side);
          const bool lit = block == label || block == (label + 5) % 16;
          ds.pixels.push_back(static_cast<std::uint8_t>(lit ? 200 + noise(gen) : noise(gen)));
        }
      }
      ds.labels.push_back(static_cast<std::uint8_t>(label));
    }
  }
  return ds;
}

/// Unit vector with normal(0,1) entries.
inline std::vector<double> random_unit(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  double s = 0.0;
  for (double& x : v) s += (x = nd(gen)) * x;
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("bqfl_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::filesystem::path data_dir() { return BQFL_DATA_DIR; }

}  // namespace bqfl::testing
