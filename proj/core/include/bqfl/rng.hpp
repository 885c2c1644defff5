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

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace bqfl {

/// Purpose tags for substreams. Values are part of the replay contract;
/// never renumber.
enum class Stream : std::uint64_t {
  ModelInit = 1,
  ShardSample = 2,
  BatchShuffle = 3,
  Latency = 4,
  ValidatorDraw = 5,
  Test = 99,
};

/// Derives a 64-bit key from (seed, tag, indices) with a splitmix64 chain.
/// Substreams are addressed by key, never by draw order, so the values a
/// device sees do not depend on how work is scheduled.
std::uint64_t derive_key(std::uint64_t seed, Stream tag,
                         std::initializer_list<std::uint64_t> indices = {});

/// Seeded generator with platform-independent distributions. The standard
/// library's distribution objects are implementation-defined, so only the
/// raw mt19937_64 output is used.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : engine_(key) {}

  static Rng substream(std::uint64_t seed, Stream tag,
                       std::initializer_list<std::uint64_t> indices = {}) {
    return Rng(derive_key(seed, tag, indices));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), unbiased; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (one output per call, no caching).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double exponential(double mean);

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bqfl
