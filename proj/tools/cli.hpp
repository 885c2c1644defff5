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

// `bqfl <verb> [--config path] [--seed u64] [--out dir] [--set key=value]...`
//
// Verbs: run, bounds, inspect-data, inspect-chain <file>.
// Exit codes: 0 success, 1 domain failure, 2 usage or config error.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bqfl/config.hpp"

namespace bqfl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Command {
  std::string verb;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string target;  // inspect-chain file
};

/// The config file plus --set overrides, then --seed and --out, validated.
config::RunConfig resolve_config(const Command& cmd);

int cmd_run(const Command& cmd, std::ostream& out, std::ostream& err);
int cmd_bounds(const Command& cmd, std::ostream& out, std::ostream& err);
int cmd_inspect_data(const Command& cmd, std::ostream& out, std::ostream& err);
int cmd_inspect_chain(const Command& cmd, std::ostream& out, std::ostream& err);

/// Parses argv (without the program name) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bqfl::cli
