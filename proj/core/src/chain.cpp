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

#include "bqfl/chain.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>

#include "bqfl/error.hpp"

namespace bqfl::chain {
namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void hash(const Hash& h) { out_.insert(out_.end(), h.begin(), h.end()); }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::size_t& offset) : bytes_(bytes), offset_(offset) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | bytes_[offset_ + i];
    offset_ += 8;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Hash hash() {
    need(32);
    Hash h;
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(offset_), 32, h.begin());
    offset_ += 32;
    return h;
  }
  /// Array length, bounded by the bytes left to guard against garbage counts.
  std::uint64_t count(std::size_t min_element_size) {
    const std::size_t at = offset_;
    const std::uint64_t n = u64();
    if (n > (bytes_.size() - offset_) / min_element_size) {
      throw ParseError("block: array length " + std::to_string(n) + " exceeds remaining bytes", at);
    }
    return n;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - offset_ < n) throw ParseError("block: truncated", offset_);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t& offset_;
};

constexpr std::size_t kUpdateFixedBytes = 8 * 7;

}  // namespace

Hash sha256(std::span<const std::uint8_t> bytes) {
  Hash out{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("sha256: digest failed");
  }
  return out;
}

std::string to_hex(const Hash& hash) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint8_t b : hash) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

// ---- StakeTable ----

StakeTable StakeTable::uniform(std::span<const DeviceId> devices, double initial) {
  StakeTable table;
  for (DeviceId id : devices) table.set(id, initial);
  return table;
}

void StakeTable::set(DeviceId id, double stake) {
  if (!(stake >= 0.0) || !std::isfinite(stake)) throw ArgumentError("stake must be finite and >= 0");
  stakes_[id] = stake;
}

void StakeTable::add(DeviceId id, double amount) { set(id, stake(id) + amount); }

double StakeTable::stake(DeviceId id) const {
  const auto it = stakes_.find(id);
  return it == stakes_.end() ? 0.0 : it->second;
}

double StakeTable::total() const {
  double sum = 0.0;
  for (const auto& [id, s] : stakes_) sum += s;
  return sum;
}

StakeTable StakeTable::restricted_to(std::span<const DeviceId> devices) const {
  StakeTable out;
  for (DeviceId id : devices) out.set(id, stake(id));
  return out;
}

// ---- serialization ----

std::vector<std::uint8_t> serialize_body(const Block& block) {
  std::vector<std::uint8_t> out;
  Writer w(out);
  w.u64(block.index);
  w.hash(block.prev_hash);
  w.f64(block.timestamp_s);
  w.i64(block.miner_id);
  w.u64(block.updates.size());
  for (const ModelUpdate& u : block.updates) {
    w.i64(u.device_id);
    w.i64(u.round);
    w.u64(u.params.size());
    for (double p : u.params) w.f64(p);
    w.i64(u.n_samples);
    w.f64(u.train_loss);
    w.f64(u.train_accuracy);
    w.f64(u.wall_time_s);
  }
  w.u64(block.stake_snapshot.size());
  for (const auto& [id, stake] : block.stake_snapshot) {
    w.i64(id);
    w.f64(stake);
  }
  return out;
}

Hash compute_hash(const Block& block) { return sha256(serialize_body(block)); }

std::vector<std::uint8_t> serialize(const Block& block) {
  std::vector<std::uint8_t> out = serialize_body(block);
  Writer(out).hash(block.block_hash);
  return out;
}

Block parse_block(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  Reader r(bytes, offset);
  Block b;
  b.index = r.u64();
  b.prev_hash = r.hash();
  b.timestamp_s = r.f64();
  b.miner_id = r.i64();
  const std::uint64_t n_updates = r.count(kUpdateFixedBytes);
  b.updates.reserve(n_updates);
  for (std::uint64_t i = 0; i < n_updates; ++i) {
    ModelUpdate u;
    u.device_id = r.i64();
    u.round = r.i64();
    const std::uint64_t n_params = r.count(8);
    u.params.reserve(n_params);
    for (std::uint64_t p = 0; p < n_params; ++p) u.params.push_back(r.f64());
    u.n_samples = r.i64();
    u.train_loss = r.f64();
    u.train_accuracy = r.f64();
    u.wall_time_s = r.f64();
    b.updates.push_back(std::move(u));
  }
  const std::uint64_t n_stakes = r.count(16);
  for (std::uint64_t i = 0; i < n_stakes; ++i) {
    const DeviceId id = r.i64();
    b.stake_snapshot.emplace_back(id, r.f64());
  }
  b.block_hash = r.hash();
  return b;
}

// ---- consensus helpers ----

std::vector<SelectionInterval> selection_intervals(const StakeTable& stakes) {
  const double total = stakes.total();
  if (!(total > 0.0)) throw ArgumentError("select_validator: total stake must be positive");
  std::vector<SelectionInterval> out;
  double cumulative = 0.0;
  for (const auto& [id, s] : stakes.entries()) {
    const double lo = cumulative / total;
    cumulative += s;
    out.push_back({id, lo, cumulative / total});
  }
  return out;
}

DeviceId select_validator(const StakeTable& stakes, double draw) {
  if (!(draw >= 0.0 && draw < 1.0)) throw ArgumentError("select_validator: draw must lie in [0, 1)");
  const double total = stakes.total();
  if (!(total > 0.0)) throw ArgumentError("select_validator: total stake must be positive");
  const double target = draw * total;
  double cumulative = 0.0;
  DeviceId last_staked = -1;
  for (const auto& [id, s] : stakes.entries()) {
    if (s <= 0.0) continue;
    cumulative += s;
    last_staked = id;
    if (target < cumulative) return id;
  }
  // Only reachable through rounding when draw * total lands on the total.
  return last_staked;
}

double block_time(double t_create, double latency) {
  if (!(t_create >= 0.0) || !(latency >= 0.0)) {
    throw ArgumentError("block_time: times must be >= 0");
  }
  return std::max(t_create, latency) + t_create;
}

double expected_block_time(const StakeTable& stakes, const std::map<DeviceId, double>& per_node_time) {
  const double total = stakes.total();
  if (!(total > 0.0)) throw ArgumentError("expected_block_time: total stake must be positive");
  // Written relative to a reference time so that a constant T comes back
  // bit-for-bit; algebraically this is (1 / sum p) * sum p_i T_i.
  std::optional<double> reference;
  double prob_sum = 0.0;
  double weighted = 0.0;
  for (const auto& [id, s] : stakes.entries()) {
    const auto it = per_node_time.find(id);
    if (it == per_node_time.end()) {
      throw ArgumentError("expected_block_time: no time for device " + std::to_string(id));
    }
    if (!reference) reference = it->second;
    const double prob = s / total;
    prob_sum += prob;
    weighted += prob * (it->second - *reference);
  }
  return *reference + weighted / prob_sum;
}

UpdateVerdict validate_update(const ModelUpdate& update, const ValidationFn& validation_accuracy,
                              double threshold) {
  for (double p : update.params) {
    if (!std::isfinite(p)) return {false, "nonfinite", 0.0};
  }
  if (update.n_samples < 0) return {false, "negative-samples", 0.0};
  const double acc = validation_accuracy(update.params);
  if (acc >= threshold) return {true, "ok", acc};
  return {false, "below-threshold", acc};
}

StakeTable apply_rewards(StakeTable stakes, const Block& block, const RewardRule& rule) {
  if (block.updates.empty()) return stakes;
  for (const ModelUpdate& u : block.updates) stakes.add(u.device_id, rule.per_update);
  stakes.add(block.miner_id, rule.per_block);
  return stakes;
}

// ---- Ledger ----

Ledger Ledger::with_genesis(const StakeTable& stakes, double timestamp_s) {
  Block genesis;
  genesis.timestamp_s = timestamp_s;
  genesis.stake_snapshot.assign(stakes.entries().begin(), stakes.entries().end());
  genesis.block_hash = compute_hash(genesis);
  Ledger ledger;
  ledger.blocks_.push_back(std::move(genesis));
  return ledger;
}

Ledger Ledger::from_blocks(std::vector<Block> blocks) {
  Ledger ledger;
  ledger.blocks_ = std::move(blocks);
  return ledger;
}

Ledger Ledger::parse(std::span<const std::uint8_t> bytes) {
  Ledger ledger;
  std::size_t offset = 0;
  while (offset < bytes.size()) ledger.blocks_.push_back(parse_block(bytes, offset));
  return ledger;
}

Ledger Ledger::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open ledger " + path.string(), 0);
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return parse(bytes);
}

const Block& Ledger::append_block(std::vector<ModelUpdate> updates, DeviceId miner_id,
                                  const StakeTable& stakes, double timestamp_s) {
  if (blocks_.empty()) throw IntegrityError("append_block: ledger has no genesis block");
  const Block& parent = blocks_.back();
  if (compute_hash(parent) != parent.block_hash) {
    throw IntegrityError("append_block: parent hash mismatch at block " + std::to_string(parent.index));
  }
  Block b;
  b.index = parent.index + 1;
  b.prev_hash = parent.block_hash;
  b.timestamp_s = timestamp_s;
  b.miner_id = miner_id;
  b.updates = std::move(updates);
  b.stake_snapshot.assign(stakes.entries().begin(), stakes.entries().end());
  b.block_hash = compute_hash(b);
  blocks_.push_back(std::move(b));
  return blocks_.back();
}

std::vector<std::uint8_t> Ledger::serialize() const {
  std::vector<std::uint8_t> out;
  for (const Block& b : blocks_) {
    const std::vector<std::uint8_t> bytes = chain::serialize(b);
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

void Ledger::save(const std::filesystem::path& path) const {
  const std::vector<std::uint8_t> bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write ledger " + path.string());
}

ChainVerdict validate_chain(const Ledger& ledger) {
  const auto blocks = ledger.blocks();
  if (blocks.empty()) return {false, 0, "empty ledger"};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (b.index != i) return {false, i, "index " + std::to_string(b.index) + " out of sequence"};
    const Hash expected_parent = i == 0 ? Hash{} : blocks[i - 1].block_hash;
    if (b.prev_hash != expected_parent) return {false, i, "parent link broken"};
    if (compute_hash(b) != b.block_hash) return {false, i, "hash does not match contents"};
  }
  return {};
}

ChainVerdict validate_chain_bytes(std::span<const std::uint8_t> bytes) {
  std::vector<Block> blocks;
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    try {
      blocks.push_back(parse_block(bytes, offset));
    } catch (const ParseError& e) {
      // Report the earliest failure: an intact prefix may already be broken.
      const ChainVerdict prefix = validate_chain(Ledger::from_blocks(blocks));
      if (!blocks.empty() && !prefix.ok) return prefix;
      return {false, blocks.size(), e.what()};
    }
  }
  return validate_chain(Ledger::from_blocks(std::move(blocks)));
}

}  // namespace bqfl::chain
