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

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace bqfl {

/// Non-owning view of one training example: feature vector plus class index.
struct LabeledView {
  std::span<const double> x;
  int label = 0;
};

using BatchView = std::span<const LabeledView>;

/// Probability floor applied before taking logs.
inline constexpr double kProbabilityClamp = 1e-12;

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

enum class Mode { BqflAvg, BqflInf, BcflAvg };

enum class Role { Worker, Miner, Global };

inline std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::BqflAvg: return "bqfl-avg";
    case Mode::BqflInf: return "bqfl-inf";
    case Mode::BcflAvg: return "bcfl-avg";
  }
  return "bqfl-avg";
}

inline std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "bqfl-avg") return Mode::BqflAvg;
  if (text == "bqfl-inf") return Mode::BqflInf;
  if (text == "bcfl-avg") return Mode::BcflAvg;
  return std::nullopt;
}

inline std::string_view to_string(Role role) {
  switch (role) {
    case Role::Worker: return "worker";
    case Role::Miner: return "miner";
    case Role::Global: return "global";
  }
  return "worker";
}

inline std::optional<Role> parse_role(std::string_view text) {
  if (text == "worker") return Role::Worker;
  if (text == "miner") return Role::Miner;
  if (text == "global") return Role::Global;
  return std::nullopt;
}

}  // namespace bqfl
