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

#include "bqfl/classical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bqfl/error.hpp"

namespace bqfl::classical {
namespace {

struct Activations {
  std::vector<double> hidden;  // tanh outputs
  std::vector<double> probs;
};

void check_input(const MlpParams& params, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(params.shape().input_dim)) {
    throw DimensionError("mlp: input length " + std::to_string(x.size()) + " != " +
                         std::to_string(params.shape().input_dim));
  }
}

Activations forward(const MlpParams& p, std::span<const double> x) {
  check_input(p, x);
  const MlpShape& s = p.shape();
  Activations act{std::vector<double>(static_cast<std::size_t>(s.hidden)),
                  std::vector<double>(static_cast<std::size_t>(s.n_classes))};
  for (int h = 0; h < s.hidden; ++h) act.hidden[h] = p.b1(h);
  for (int in = 0; in < s.input_dim; ++in) {
    const double xi = x[in];
    if (xi == 0.0) continue;
    for (int h = 0; h < s.hidden; ++h) act.hidden[h] += p.w1(in, h) * xi;
  }
  for (double& v : act.hidden) v = std::tanh(v);

  for (int c = 0; c < s.n_classes; ++c) {
    double z = p.b2(c);
    for (int h = 0; h < s.hidden; ++h) z += p.w2(h, c) * act.hidden[h];
    act.probs[c] = z;
  }
  const double peak = *std::max_element(act.probs.begin(), act.probs.end());
  double sum = 0.0;
  for (double& v : act.probs) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : act.probs) v /= sum;
  return act;
}

void check_batch(const MlpParams& params, BatchView batch) {
  if (batch.empty()) throw ArgumentError("batch must be nonempty");
  for (const LabeledView& s : batch) {
    if (s.label < 0 || s.label >= params.shape().n_classes) {
      throw ArgumentError("label " + std::to_string(s.label) + " out of range");
    }
  }
}

}  // namespace

std::size_t MlpShape::param_count() const {
  return static_cast<std::size_t>(input_dim) * hidden + hidden +
         static_cast<std::size_t>(hidden) * n_classes + n_classes;
}

MlpParams MlpParams::zeros(const MlpShape& shape) {
  if (shape.input_dim < 1 || shape.hidden < 1 || shape.n_classes < 1) {
    throw DimensionError("MlpShape: all dimensions must be positive");
  }
  return MlpParams(shape, std::vector<double>(shape.param_count()));
}

MlpParams MlpParams::from_flat(const MlpShape& shape, std::vector<double> values) {
  MlpParams params = zeros(shape);
  if (values.size() != params.values_.size()) {
    throw DimensionError("MlpParams: expected " + std::to_string(params.values_.size()) +
                         " values, got " + std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("MlpParams: non-finite entry");
  }
  params.values_ = std::move(values);
  return params;
}

MlpParams MlpParams::init_uniform(const MlpShape& shape, Rng& rng) {
  MlpParams p = zeros(shape);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(shape.input_dim));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (int in = 0; in < shape.input_dim; ++in) {
    for (int h = 0; h < shape.hidden; ++h) p.w1(in, h) = rng.uniform(-bound1, bound1);
  }
  for (int h = 0; h < shape.hidden; ++h) p.b1(h) = rng.uniform(-bound1, bound1);
  for (int h = 0; h < shape.hidden; ++h) {
    for (int c = 0; c < shape.n_classes; ++c) p.w2(h, c) = rng.uniform(-bound2, bound2);
  }
  for (int c = 0; c < shape.n_classes; ++c) p.b2(c) = rng.uniform(-bound2, bound2);
  return p;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x) {
  return forward(params, x).probs;
}

double mlp_loss(const MlpParams& params, BatchView batch) {
  check_batch(params, batch);
  double total = 0.0;
  for (const LabeledView& s : batch) {
    const std::vector<double> p = mlp_forward(params, s.x);
    total += -std::log(std::max(p[static_cast<std::size_t>(s.label)], kProbabilityClamp));
  }
  return total / static_cast<double>(batch.size());
}

double mlp_accuracy(const MlpParams& params, BatchView batch) {
  if (batch.empty()) throw ArgumentError("batch must be nonempty");
  std::size_t correct = 0;
  for (const LabeledView& s : batch) {
    if (argmax(mlp_forward(params, s.x)) == static_cast<std::size_t>(s.label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

MlpLossAndGrad mlp_loss_and_grad(const MlpParams& params, BatchView batch) {
  check_batch(params, batch);
  const MlpShape& s = params.shape();
  MlpLossAndGrad out{0.0, MlpParams::zeros(s)};
  MlpParams& g = out.grad;
  std::vector<double> dlogit(static_cast<std::size_t>(s.n_classes));
  std::vector<double> dz1(static_cast<std::size_t>(s.hidden));

  for (const LabeledView& sample : batch) {
    const Activations act = forward(params, sample.x);
    const auto y = static_cast<std::size_t>(sample.label);
    out.loss += -std::log(std::max(act.probs[y], kProbabilityClamp));
    if (act.probs[y] < kProbabilityClamp) continue;  // clamped: locally constant

    for (int c = 0; c < s.n_classes; ++c) {
      dlogit[c] = act.probs[c] - (static_cast<std::size_t>(c) == y ? 1.0 : 0.0);
      g.b2(c) += dlogit[c];
    }
    for (int h = 0; h < s.hidden; ++h) {
      double da = 0.0;
      for (int c = 0; c < s.n_classes; ++c) {
        g.w2(h, c) += act.hidden[h] * dlogit[c];
        da += params.w2(h, c) * dlogit[c];
      }
      dz1[h] = da * (1.0 - act.hidden[h] * act.hidden[h]);
      g.b1(h) += dz1[h];
    }
    for (int in = 0; in < s.input_dim; ++in) {
      const double xi = sample.x[in];
      if (xi == 0.0) continue;
      for (int h = 0; h < s.hidden; ++h) g.w1(in, h) += xi * dz1[h];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (double& v : g.flat()) v *= inv;
  return out;
}

MlpParams mlp_grad(const MlpParams& params, BatchView batch) {
  return mlp_loss_and_grad(params, batch).grad;
}

}  // namespace bqfl::classical
