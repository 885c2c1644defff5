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

#include "bqfl/chain.hpp"

namespace {

using namespace bqfl;

std::vector<chain::ModelUpdate> updates(int count, std::size_t params) {
  std::vector<chain::ModelUpdate> out;
  for (int i = 0; i < count; ++i) {
    chain::ModelUpdate u;
    u.device_id = i;
    u.round = 1;
    u.params.assign(params, 0.25 * i);
    u.n_samples = 100;
    out.push_back(std::move(u));
  }
  return out;
}

chain::StakeTable stakes(int devices) {
  std::vector<chain::DeviceId> ids;
  for (int i = 0; i < devices; ++i) ids.push_back(i);
  return chain::StakeTable::uniform(ids);
}

void BM_Sha256(benchmark::State& state) {
  const std::vector<std::uint8_t> bytes(static_cast<std::size_t>(state.range(0)), 0xab);
  for (auto _ : state) benchmark::DoNotOptimize(chain::sha256(bytes));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Range(64, 1 << 20);

void BM_AppendBlock(benchmark::State& state) {
  const auto st = stakes(9);
  const auto us = updates(7, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto ledger = chain::Ledger::with_genesis(st);
    benchmark::DoNotOptimize(ledger.append_block(us, 7, st, 1.0));
  }
}
BENCHMARK(BM_AppendBlock)->Arg(48)->Arg(1000)->Arg(8488);

void BM_ValidateChain(benchmark::State& state) {
  const auto st = stakes(9);
  auto ledger = chain::Ledger::with_genesis(st);
  for (int r = 0; r < state.range(0); ++r) ledger.append_block(updates(7, 200), 7 + r % 2, st, r + 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(chain::validate_chain(ledger));
}
BENCHMARK(BM_ValidateChain)->Arg(3)->Arg(30);

void BM_SelectValidator(benchmark::State& state) {
  const auto st = stakes(static_cast<int>(state.range(0)));
  double draw = 0.0;
  for (auto _ : state) {
    draw = draw + 0.6180339887498949;
    if (draw >= 1.0) draw -= 1.0;
    benchmark::DoNotOptimize(chain::select_validator(st, draw));
  }
}
BENCHMARK(BM_SelectValidator)->Arg(9)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
