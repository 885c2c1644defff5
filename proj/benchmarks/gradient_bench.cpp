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

#include <benchmark/benchmark.h>

#include <vector>

#include "bqfl/classical.hpp"
#include "bqfl/rng.hpp"
#include "bqfl/vqc.hpp"

namespace {

using namespace bqfl;

struct Batch {
  std::vector<std::vector<double>> xs;
  std::vector<LabeledView> views;
};

Batch make_batch(std::size_t dim, int size, int n_classes) {
  Rng rng = Rng::substream(2, Stream::Test, {});
  Batch b;
  for (int i = 0; i < size; ++i) {
    std::vector<double> x(dim);
    for (double& v : x) v = rng.uniform();
    b.xs.push_back(std::move(x));
  }
  for (int i = 0; i < size; ++i) b.views.push_back({b.xs[i], i % n_classes});
  return b;
}

void BM_ParameterShift(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng = Rng::substream(3, Stream::Test, {});
  const auto params = vqc::CircuitParams::random_normal(k, n, rng, 1.0);
  const auto batch = make_batch(std::size_t{1} << n, 8, 4);
  const vqc::ReadoutMode mode{vqc::Readout::Softmax, 4};
  for (auto _ : state) benchmark::DoNotOptimize(vqc::loss_and_grad(params, batch.views, mode));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_ParameterShift)->Args({4, 2})->Args({4, 16})->Args({8, 2})->Unit(benchmark::kMicrosecond);

void BM_FiniteDifference(benchmark::State& state) {
  Rng rng = Rng::substream(3, Stream::Test, {});
  const auto params = vqc::CircuitParams::random_normal(2, 4, rng, 1.0);
  const auto batch = make_batch(16, 8, 4);
  const vqc::ReadoutMode mode{vqc::Readout::Softmax, 4};
  for (auto _ : state) benchmark::DoNotOptimize(vqc::grad_finite_diff(params, batch.views, mode, 1e-4));
}
BENCHMARK(BM_FiniteDifference)->Unit(benchmark::kMicrosecond);

void BM_MlpGradient(benchmark::State& state) {
  Rng rng = Rng::substream(4, Stream::Test, {});
  const classical::MlpShape shape{256, 32, 8};
  const auto p = classical::MlpParams::init_uniform(shape, rng);
  const auto batch = make_batch(256, 128, 8);
  for (auto _ : state) benchmark::DoNotOptimize(classical::mlp_loss_and_grad(p, batch.views));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_MlpGradient)->Unit(benchmark::kMicrosecond);

}  // namespace
