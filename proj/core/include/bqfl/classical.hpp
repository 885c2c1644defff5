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

// One-hidden-layer baseline: softmax(w2^T tanh(w1^T x + b1) + b2).

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bqfl/rng.hpp"
#include "bqfl/types.hpp"

namespace bqfl::classical {

struct MlpShape {
  int input_dim = 256;
  int hidden = 32;
  int n_classes = 8;

  std::size_t param_count() const;
  bool operator==(const MlpShape&) const = default;
};

/// All weights in one flat buffer: w1 [input x hidden], b1 [hidden],
/// w2 [hidden x classes], b2 [classes], each row-major.
class MlpParams {
 public:
  static MlpParams zeros(const MlpShape& shape);
  static MlpParams from_flat(const MlpShape& shape, std::vector<double> values);
  /// Each layer uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static MlpParams init_uniform(const MlpShape& shape, Rng& rng);

  const MlpShape& shape() const noexcept { return shape_; }

  std::span<const double> flat() const noexcept { return values_; }
  std::span<double> flat() noexcept { return values_; }

  double w1(int in, int h) const { return values_[w1_index(in, h)]; }
  double& w1(int in, int h) { return values_[w1_index(in, h)]; }
  double b1(int h) const { return values_[b1_offset() + h]; }
  double& b1(int h) { return values_[b1_offset() + h]; }
  double w2(int h, int c) const { return values_[w2_index(h, c)]; }
  double& w2(int h, int c) { return values_[w2_index(h, c)]; }
  double b2(int c) const { return values_[b2_offset() + c]; }
  double& b2(int c) { return values_[b2_offset() + c]; }

  bool operator==(const MlpParams&) const = default;

 private:
  MlpParams(const MlpShape& shape, std::vector<double> values)
      : shape_(shape), values_(std::move(values)) {}

  std::size_t w1_index(int in, int h) const {
    return static_cast<std::size_t>(in) * shape_.hidden + h;
  }
  std::size_t b1_offset() const { return static_cast<std::size_t>(shape_.input_dim) * shape_.hidden; }
  std::size_t w2_index(int h, int c) const {
    return b1_offset() + shape_.hidden + static_cast<std::size_t>(h) * shape_.n_classes + c;
  }
  std::size_t b2_offset() const {
    return b1_offset() + shape_.hidden + static_cast<std::size_t>(shape_.hidden) * shape_.n_classes;
  }

  MlpShape shape_;
  std::vector<double> values_;
};

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x);

double mlp_loss(const MlpParams& params, BatchView batch);

double mlp_accuracy(const MlpParams& params, BatchView batch);

struct MlpLossAndGrad {
  double loss = 0.0;
  MlpParams grad;
};

/// Backpropagated gradient of the mean clamped NLL.
MlpLossAndGrad mlp_loss_and_grad(const MlpParams& params, BatchView batch);

MlpParams mlp_grad(const MlpParams& params, BatchView batch);

}  // namespace bqfl::classical
