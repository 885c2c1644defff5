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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "bqfl/error.hpp"
#include "bqfl/rng.hpp"
#include "test_support.hpp"

namespace bqfl::chain {
namespace {

// Independent big-endian encoder for the canonical block layout.
struct Bytes {
  std::vector<std::uint8_t> b;
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

ModelUpdate sample_update(DeviceId id, std::int64_t round) {
  return {id, round, {0.5, -1.25, 3.0}, 10 + id, 0.7, 0.4, 0.01};
}

Ledger three_block_ledger() {
  const std::vector<DeviceId> ids{0, 1, 2, 3};
  StakeTable stakes = StakeTable::uniform(ids);
  Ledger l = Ledger::with_genesis(stakes, 0.0);
  for (int r = 1; r <= 3; ++r) {
    const Block& b = l.append_block({sample_update(0, r), sample_update(1, r)}, 3, stakes, r * 1.5);
    stakes = apply_rewards(stakes, b, {});
  }
  return l;
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(to_hex(sha256({})), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  EXPECT_EQ(to_hex(sha256({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()})),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Serialize, CanonicalLayout) {
  Block b;
  b.index = 2;
  b.prev_hash.fill(0xab);
  b.timestamp_s = 1.5;
  b.miner_id = 8;
  b.updates = {sample_update(3, 2)};
  b.stake_snapshot = {{3, 2.0}, {8, 1.0}};

  Bytes want;
  want.u64(2);
  want.b.insert(want.b.end(), 32, 0xab);
  want.f64(1.5);
  want.u64(8);
  want.u64(1);
  want.u64(3);
  want.u64(2);
  want.u64(3);
  for (double p : {0.5, -1.25, 3.0}) want.f64(p);
  want.u64(13);
  want.f64(0.7);
  want.f64(0.4);
  want.f64(0.01);
  want.u64(2);
  want.u64(3);
  want.f64(2.0);
  want.u64(8);
  want.f64(1.0);
  EXPECT_EQ(serialize_body(b), want.b);
  EXPECT_EQ(compute_hash(b), sha256(want.b));
}

TEST(Serialize, RoundTrip) {
  const Ledger l = three_block_ledger();
  for (const Block& b : l.blocks()) {
    const auto bytes = serialize(b);
    std::size_t off = 0;
    EXPECT_EQ(parse_block(bytes, off), b);
    EXPECT_EQ(off, bytes.size());
  }
  const Ledger again = Ledger::parse(l.serialize());
  EXPECT_EQ(again.serialize(), l.serialize());
  EXPECT_TRUE(validate_chain(again).ok);
}

TEST(Serialize, NegativeZeroAndNanBitsSurvive) {
  Block b;
  b.timestamp_s = -0.0;
  b.updates = {ModelUpdate{1, 1, {std::numeric_limits<double>::infinity()}, 0, 0, 0, 0}};
  const auto bytes = serialize(b);
  std::size_t off = 0;
  const Block back = parse_block(bytes, off);
  EXPECT_TRUE(std::signbit(back.timestamp_s));
  EXPECT_TRUE(std::isinf(back.updates[0].params[0]));
}

TEST(Serialize, TruncationAndHugeCountsFailCleanly) {
  const auto bytes = three_block_ledger().serialize();
  for (std::size_t cut : {std::size_t{1}, std::size_t{40}, bytes.size() - 1}) {
    std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(Ledger::parse(t), ParseError);
  }
  Block b;
  auto raw = serialize(b);
  // Update count field sits after index, prev hash, timestamp, miner.
  raw[56] = 0x7f;
  std::size_t off = 0;
  EXPECT_THROW(parse_block(raw, off), ParseError);
}

TEST(Stakes, TableBasics) {
  const std::vector<DeviceId> ids{4, 1, 9};
  StakeTable t = StakeTable::uniform(ids, 2.0);
  EXPECT_DOUBLE_EQ(t.total(), 6.0);
  t.add(1, 3.0);
  EXPECT_DOUBLE_EQ(t.stake(1), 5.0);
  EXPECT_DOUBLE_EQ(t.probability(1), 5.0 / 9.0);
  EXPECT_EQ(t.stake(2), 0.0);
  EXPECT_FALSE(t.contains(2));
  EXPECT_THROW(t.set(2, -1.0), ArgumentError);
  const std::vector<DeviceId> sub{1, 9};
  EXPECT_DOUBLE_EQ(t.restricted_to(sub).total(), 7.0);
}

TEST(Validator, HalfSplit) {
  const std::vector<DeviceId> ids{0, 1};
  const StakeTable t = StakeTable::uniform(ids);
  EXPECT_EQ(select_validator(t, 0.25), 0);
  EXPECT_EQ(select_validator(t, 0.75), 1);
  EXPECT_EQ(select_validator(t, 0.0), 0);
  EXPECT_EQ(select_validator(t, 0.5), 1);
}

TEST(Validator, IntervalsAreStakeShares) {
  StakeTable t;
  t.set(0, 1.0);
  t.set(1, 3.0);
  const auto iv = selection_intervals(t);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_DOUBLE_EQ(iv[0].hi - iv[0].lo, 0.25);
  EXPECT_DOUBLE_EQ(iv[1].hi - iv[1].lo, 0.75);
  EXPECT_EQ(iv[1].hi, 1.0);
}

TEST(Validator, IntervalMeasureProperty) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    StakeTable t;
    const int n = 2 + trial % 6;
    for (int i = 0; i < n; ++i) t.set(i * 3, u(gen));
    double lo = 0.0;
    for (const auto& iv : selection_intervals(t)) {
      EXPECT_EQ(iv.lo, lo);
      EXPECT_NEAR(iv.hi - iv.lo, t.probability(iv.id), 1e-12);
      // Draws just inside each interval land on its owner.
      EXPECT_EQ(select_validator(t, iv.lo + (iv.hi - iv.lo) * 0.5), iv.id);
      lo = iv.hi;
    }
    EXPECT_EQ(lo, 1.0);
  }
}

TEST(Validator, MonteCarloFrequencies) {
  StakeTable t;
  for (int i = 0; i < 4; ++i) t.set(i, i + 1.0);
  Rng rng = Rng::substream(1, Stream::ValidatorDraw, {});
  std::vector<int> hits(4);
  for (int i = 0; i < 10000; ++i) ++hits[static_cast<std::size_t>(select_validator(t, rng.uniform()))];
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(hits[i] / 10000.0, (i + 1) / 10.0, 0.02);
}

TEST(Validator, ZeroStakeOrBadDraw) {
  StakeTable t;
  t.set(0, 0.0);
  EXPECT_THROW(select_validator(t, 0.5), ArgumentError);
  EXPECT_THROW(select_validator(StakeTable{}, 0.5), ArgumentError);
  t.set(0, 1.0);
  EXPECT_THROW(select_validator(t, 1.0), ArgumentError);
}

TEST(BlockTime, Examples) {
  EXPECT_EQ(block_time(2.0, 3.0), 5.0);
  EXPECT_EQ(block_time(1.5, 0.0), 3.0);
  EXPECT_EQ(block_time(0.0, 0.7), 0.7);
  EXPECT_EQ(block_time(2.0, 1.0), 4.0);
}

TEST(ExpectedBlockTime, Examples) {
  StakeTable t;
  t.set(0, 1.0);
  t.set(1, 1.0);
  EXPECT_DOUBLE_EQ(expected_block_time(t, {{0, 4.0}, {1, 6.0}}), 5.0);
  t.set(1, 3.0);
  EXPECT_DOUBLE_EQ(expected_block_time(t, {{0, 4.0}, {1, 8.0}}), 7.0);
  EXPECT_THROW(expected_block_time(t, {{0, 4.0}}), ArgumentError);
}

TEST(ExpectedBlockTime, ConstantIsExact) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    StakeTable t;
    std::map<DeviceId, double> times;
    const double T = u(gen);
    for (int i = 0; i < 1 + trial % 9; ++i) {
      t.set(i, u(gen));
      times[i] = T;
    }
    EXPECT_EQ(expected_block_time(t, times), T);
  }
}

TEST(ValidateUpdate, Rules) {
  const ValidationFn half = [](std::span<const double>) { return 0.5; };
  ModelUpdate u = sample_update(0, 1);
  EXPECT_TRUE(validate_update(u, half, 0.0).accepted);
  EXPECT_EQ(validate_update(u, half, 0.5).reason, "ok");
  const UpdateVerdict low = validate_update(u, half, 0.6);
  EXPECT_FALSE(low.accepted);
  EXPECT_EQ(low.reason, "below-threshold");
  EXPECT_EQ(low.accuracy, 0.5);
  u.params[1] = std::numeric_limits<double>::quiet_NaN();
  int calls = 0;
  const ValidationFn counting = [&](std::span<const double>) { return ++calls, 1.0; };
  const UpdateVerdict nf = validate_update(u, counting, 0.0);
  EXPECT_FALSE(nf.accepted);
  EXPECT_EQ(nf.reason, "nonfinite");
  EXPECT_EQ(calls, 0);
}

TEST(Rewards, Rules) {
  std::vector<DeviceId> ids{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const StakeTable t = StakeTable::uniform(ids);
  Block empty;
  empty.miner_id = 8;
  EXPECT_EQ(apply_rewards(t, empty, {}), t);
  Block full;
  full.miner_id = 8;
  for (DeviceId w = 0; w < 7; ++w) full.updates.push_back(sample_update(w, 1));
  const StakeTable after = apply_rewards(t, full, {});
  EXPECT_EQ(after.total(), t.total() + 9.0);
  EXPECT_EQ(after.stake(8), 3.0);
  EXPECT_EQ(after.stake(0), 2.0);
  double sum = 0.0;
  for (const auto& [id, s] : after.entries()) {
    EXPECT_GE(s, 0.0);
    sum += s;
  }
  EXPECT_EQ(sum, after.total());
}

TEST(Ledger, GenesisAndAppend) {
  const Ledger l = three_block_ledger();
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l.blocks()[0].index, 0u);
  EXPECT_EQ(l.blocks()[0].prev_hash, Hash{});
  EXPECT_EQ(l.blocks()[0].stake_snapshot.size(), 4u);
  for (std::size_t i = 1; i < l.size(); ++i) {
    EXPECT_EQ(l.blocks()[i].index, i);
    EXPECT_EQ(l.blocks()[i].prev_hash, l.blocks()[i - 1].block_hash);
    EXPECT_EQ(l.blocks()[i].block_hash, compute_hash(l.blocks()[i]));
  }
  EXPECT_TRUE(validate_chain(l).ok);
}

TEST(Ledger, AppendRefusesATamperedHead) {
  Ledger l = three_block_ledger();
  std::vector<Block> blocks(l.blocks().begin(), l.blocks().end());
  blocks.back().timestamp_s += 1.0;
  Ledger bad = Ledger::from_blocks(blocks);
  EXPECT_THROW(bad.append_block({}, 3, StakeTable::uniform(std::vector<DeviceId>{3}), 9.0),
               IntegrityError);
}

TEST(Ledger, TamperDetectedAtTheRightBlock) {
  const Ledger l = three_block_ledger();
  std::vector<Block> blocks(l.blocks().begin(), l.blocks().end());
  blocks[2].updates[0].params[0] = 0.25;
  const ChainVerdict v = validate_chain(Ledger::from_blocks(blocks));
  EXPECT_FALSE(v.ok);
  EXPECT_EQ(v.first_bad, 2u);

  // A broken parent link: block 2 rehashed, so block 3's prev no longer matches.
  blocks[2].block_hash = compute_hash(blocks[2]);
  const ChainVerdict link = validate_chain(Ledger::from_blocks(blocks));
  EXPECT_FALSE(link.ok);
  EXPECT_EQ(link.first_bad, 3u);
}

TEST(Ledger, EverySingleByteFlipIsDetected) {
  const auto bytes = three_block_ledger().serialize();
  for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
    auto t = bytes;
    t[pos] ^= 0x01;
    ASSERT_FALSE(validate_chain_bytes(t).ok) << "byte " << pos;
  }
}

TEST(Ledger, SaveLoad) {
  const auto dir = testing::temp_dir("ledger");
  const Ledger l = three_block_ledger();
  l.save(dir / "x.chain");
  EXPECT_EQ(Ledger::load(dir / "x.chain").serialize(), l.serialize());
  EXPECT_THROW(Ledger::load(dir / "missing.chain"), ParseError);
}

TEST(Ledger, ReplayGivesIdenticalHashes) {
  const Ledger a = three_block_ledger();
  const Ledger b = three_block_ledger();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.blocks()[i].block_hash, b.blocks()[i].block_hash);
}

}  // namespace
}  // namespace bqfl::chain
