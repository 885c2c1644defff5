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

// Simulated proof-of-stake ledger.
//
// Canonical block encoding (all multi-byte values big-endian):
//
//   u64 index | 32B prev_hash | f64 timestamp_s | i64 miner_id
//   u64 n_updates, then per update:
//     i64 device_id | i64 round | u64 n_params | f64 x n_params
//     i64 n_samples | f64 train_loss | f64 train_accuracy | f64 wall_time_s
//   u64 n_stakes, then per entry: i64 device_id | f64 stake
//   32B block_hash = SHA-256 of everything above
//
// f64 is the IEEE-754 binary64 bit pattern. A ledger file is the blocks'
// encodings concatenated, genesis first.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bqfl::chain {

using DeviceId = std::int64_t;
using Hash = std::array<std::uint8_t, 32>;

Hash sha256(std::span<const std::uint8_t> bytes);
std::string to_hex(const Hash& hash);

struct ModelUpdate {
  DeviceId device_id = 0;
  std::int64_t round = 0;
  std::vector<double> params;
  std::int64_t n_samples = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double wall_time_s = 0.0;

  bool operator==(const ModelUpdate&) const = default;
};

class StakeTable {
 public:
  StakeTable() = default;
  /// Every listed device starts at `initial`.
  static StakeTable uniform(std::span<const DeviceId> devices, double initial = 1.0);

  void set(DeviceId id, double stake);
  void add(DeviceId id, double amount);
  double stake(DeviceId id) const;
  bool contains(DeviceId id) const { return stakes_.contains(id); }

  /// Sum in ascending device-id order.
  double total() const;
  double probability(DeviceId id) const { return stake(id) / total(); }

  StakeTable restricted_to(std::span<const DeviceId> devices) const;

  const std::map<DeviceId, double>& entries() const noexcept { return stakes_; }
  bool operator==(const StakeTable&) const = default;

 private:
  std::map<DeviceId, double> stakes_;
};

struct Block {
  std::uint64_t index = 0;
  Hash prev_hash{};
  double timestamp_s = 0.0;
  DeviceId miner_id = -1;
  std::vector<ModelUpdate> updates;
  std::vector<std::pair<DeviceId, double>> stake_snapshot;
  Hash block_hash{};

  bool operator==(const Block&) const = default;
};

/// Canonical bytes of every field except block_hash.
std::vector<std::uint8_t> serialize_body(const Block& block);
Hash compute_hash(const Block& block);
std::vector<std::uint8_t> serialize(const Block& block);
/// Decodes one block at `offset`, advancing it. Throws ParseError.
Block parse_block(std::span<const std::uint8_t> bytes, std::size_t& offset);

struct SelectionInterval {
  DeviceId id;
  double lo;  // fraction of total stake, [lo, hi)
  double hi;
};

/// Cumulative stake intervals in ascending device-id order, normalized to [0, 1].
std::vector<SelectionInterval> selection_intervals(const StakeTable& stakes);

/// Inverse-CDF draw: the device whose interval contains draw * Stake.
DeviceId select_validator(const StakeTable& stakes, double draw);

/// T = max(t, L) + t.
double block_time(double t_create, double latency);

/// E[T] = (1 / sum prob_i) * sum prob_i T_i over every staked device.
double expected_block_time(const StakeTable& stakes, const std::map<DeviceId, double>& per_node_time);

struct UpdateVerdict {
  bool accepted = false;
  std::string reason;
  double accuracy = 0.0;
};

/// Accuracy of a parameter vector on the validating miner's slice.
using ValidationFn = std::function<double(std::span<const double>)>;

UpdateVerdict validate_update(const ModelUpdate& update, const ValidationFn& validation_accuracy,
                              double threshold);

struct RewardRule {
  double per_update = 1.0;
  double per_block = 2.0;
};

/// Each update's worker gains per_update; the miner gains per_block when the
/// block carries at least one update.
StakeTable apply_rewards(StakeTable stakes, const Block& block, const RewardRule& rule);

struct ChainVerdict {
  bool ok = true;
  std::optional<std::size_t> first_bad;
  std::string reason;
};

class Ledger {
 public:
  static Ledger with_genesis(const StakeTable& stakes, double timestamp_s = 0.0);
  /// Adopts blocks verbatim with no checks (auditing and tests).
  static Ledger from_blocks(std::vector<Block> blocks);
  /// Throws ParseError on malformed bytes; does not verify hashes.
  static Ledger parse(std::span<const std::uint8_t> bytes);
  static Ledger load(const std::filesystem::path& path);

  /// Links a new block to the head. Throws IntegrityError when the head's
  /// stored hash no longer matches its contents.
  const Block& append_block(std::vector<ModelUpdate> updates, DeviceId miner_id,
                            const StakeTable& stakes, double timestamp_s);

  std::span<const Block> blocks() const noexcept { return blocks_; }
  const Block& head() const { return blocks_.back(); }
  std::size_t size() const noexcept { return blocks_.size(); }

  std::vector<std::uint8_t> serialize() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<Block> blocks_;
};

/// Recomputes every hash, index and parent link.
ChainVerdict validate_chain(const Ledger& ledger);

/// Parses then validates; a decoding failure reports the block it hit.
ChainVerdict validate_chain_bytes(std::span<const std::uint8_t> bytes);

}  // namespace bqfl::chain
