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

#include "bqfl/data.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "bqfl/error.hpp"
#include "test_support.hpp"

namespace bqfl::data {
namespace {

RawDataset two_image_fixture() {
  RawDataset ds;
  ds.rows = 2;
  ds.cols = 3;
  ds.pixels = {0, 1, 2, 3, 4, 255, 9, 8, 7, 6, 5, 4};
  ds.labels = {7, 2};
  return ds;
}

// Big-endian fixture bytes written longhand.
std::vector<std::uint8_t> fixture_image_bytes() {
  return {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3,
          0, 1, 2, 3, 4, 255, 9, 8, 7, 6, 5, 4};
}
std::vector<std::uint8_t> fixture_label_bytes() { return {0, 0, 8, 1, 0, 0, 0, 2, 7, 2}; }

TEST(Idx, ParsesHandBuiltFixture) {
  const RawDataset ds = parse_idx(fixture_image_bytes(), fixture_label_bytes());
  EXPECT_EQ(ds, two_image_fixture());
  EXPECT_EQ(encode_idx_images(ds), fixture_image_bytes());
  EXPECT_EQ(encode_idx_labels(ds), fixture_label_bytes());
}

TEST(Idx, ErrorsCarryOffsets) {
  auto img = fixture_image_bytes();
  auto lab = fixture_label_bytes();
  img[3] = 4;
  try {
    parse_idx(img, lab);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }

  img = fixture_image_bytes();
  img.resize(img.size() - 1);
  try {
    parse_idx(img, lab);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 16u);
  }

  img = fixture_image_bytes();
  lab[7] = 3;
  EXPECT_THROW(parse_idx(img, lab), ParseError);

  lab = fixture_label_bytes();
  lab[9] = 11;
  try {
    parse_idx(img, lab);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 9u);
  }

  EXPECT_THROW(parse_idx(std::vector<std::uint8_t>{0, 0, 8}, lab), ParseError);
}

TEST(Idx, FileRoundTrip) {
  const auto dir = testing::temp_dir("idx");
  {
    std::ofstream(dir / "i", std::ios::binary).write(
        reinterpret_cast<const char*>(fixture_image_bytes().data()), 28);
    const auto l = fixture_label_bytes();
    std::ofstream(dir / "l", std::ios::binary).write(reinterpret_cast<const char*>(l.data()), 10);
  }
  EXPECT_EQ(load_idx(dir / "i", dir / "l"), two_image_fixture());
  EXPECT_THROW(load_idx(dir / "missing", dir / "l"), ParseError);
}

TEST(Idx, BundledSubsetHeaders) {
  const RawDataset train = load_idx(testing::data_dir() / "train-images-idx3-ubyte",
                                    testing::data_dir() / "train-labels-idx1-ubyte");
  const RawDataset test = load_idx(testing::data_dir() / "t10k-images-idx3-ubyte",
                                   testing::data_dir() / "t10k-labels-idx1-ubyte");
  EXPECT_EQ(train.rows, 28);
  EXPECT_EQ(train.cols, 28);
  EXPECT_EQ(train.size(), 4000u);
  EXPECT_EQ(test.size(), 1000u);
  for (std::size_t c : class_counts(train)) EXPECT_EQ(c, 400u);
  for (std::size_t c : class_counts(test)) EXPECT_EQ(c, 100u);
}

TEST(Filter, RemovesClassesAndKeepsOrder) {
  const RawDataset ds = testing::synthetic_dataset({0, 8, 3, 9, 5}, 3, 1);
  const RawDataset kept = class_filter(ds, {8, 9});
  ASSERT_EQ(kept.size(), 9u);
  std::vector<int> labels(kept.labels.begin(), kept.labels.end());
  EXPECT_EQ(labels, (std::vector<int>{0, 3, 5, 0, 3, 5, 0, 3, 5}));
  EXPECT_TRUE(std::equal(kept.image(1).begin(), kept.image(1).end(), ds.image(2).begin()));
  EXPECT_EQ(class_filter(ds, {}), ds);
  EXPECT_EQ(class_filter(ds, {0, 3, 5, 8, 9}).size(), 0u);
}

TEST(Resize, ConstantImageStaysConstant) {
  const std::vector<double> img(28 * 28, 0.37);
  for (double v : resize_bilinear(img, 28, 28, 4, 4)) EXPECT_NEAR(v, 0.37, 1e-15);
}

TEST(Resize, SamplesPixelCentres) {
  // 4 -> 2 samples at 0.5 and 2.5: means of neighbouring pairs.
  const std::vector<double> row{0, 1, 2, 3};
  const auto out = resize_bilinear(row, 1, 4, 1, 2);
  EXPECT_NEAR(out[0], 0.5, 1e-15);
  EXPECT_NEAR(out[1], 2.5, 1e-15);
  // Upsampling clamps at the border.
  const auto up = resize_bilinear(std::vector<double>{0, 1}, 1, 2, 1, 4);
  EXPECT_NEAR(up[0], 0.0, 1e-15);
  EXPECT_NEAR(up[1], 0.25, 1e-15);
  EXPECT_NEAR(up[3], 1.0, 1e-15);
  EXPECT_THROW(resize_bilinear(row, 2, 4, 1, 1), DimensionError);
}

TEST(Preprocess, QuantumSizes) {
  const RawDataset ds = testing::synthetic_dataset({1, 2}, 2, 3);
  const auto p8 = preprocess(ds, EncodingMode::Vanilla, 8, 8);
  ASSERT_EQ(p8.size(), 4u);
  EXPECT_EQ(p8[0].x.size(), 256u);
  const auto p4 = preprocess(ds, EncodingMode::Vanilla, 4, 8);
  EXPECT_EQ(p4[0].x.size(), 16u);
  for (const auto& s : p4) {
    double n = 0.0;
    for (double v : s.x) n += v * v;
    EXPECT_NEAR(n, 1.0, 1e-12);
    EXPECT_EQ(s.y.size(), 8u);
    EXPECT_EQ(s.y[static_cast<std::size_t>(s.source_label)], 1.0);
    EXPECT_EQ(s.label(), s.source_label);
  }
  EXPECT_THROW(preprocess(ds, EncodingMode::Vanilla, 7, 8), ConfigError);
}

TEST(Preprocess, ConstantImageBecomesUniform) {
  RawDataset ds;
  ds.rows = ds.cols = 28;
  ds.pixels.assign(784, 90);
  ds.labels = {0};
  const auto p = preprocess(ds, EncodingMode::Vanilla, 4, 2);
  for (double v : p[0].x) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(Preprocess, ThreeFourFive) {
  RawDataset ds;
  ds.rows = ds.cols = 2;
  ds.pixels = {30, 40, 0, 0};
  ds.labels = {1};
  const auto p = preprocess(ds, PreprocessOptions{EncodingMode::Vanilla, 2, 2, true});
  EXPECT_NEAR(p[0].x[0], 0.6, 1e-15);
  EXPECT_NEAR(p[0].x[1], 0.8, 1e-15);
  EXPECT_EQ(p[0].x[2], 0.0);
}

TEST(Preprocess, ShiftModes) {
  RawDataset ds;
  ds.rows = ds.cols = 2;
  ds.pixels = {255, 0, 0, 255, 0, 255, 255, 0};
  ds.labels = {0, 1};
  const std::vector<double> mean = mean_image(ds);
  for (double m : mean) EXPECT_DOUBLE_EQ(m, 0.5);
  const PreprocessOptions half{EncodingMode::Half, 2, 2, false};
  const auto h = preprocess(ds, half);
  EXPECT_EQ(h[0].x, (std::vector<double>{0.5, -0.5, -0.5, 0.5}));
  const PreprocessOptions mean_opt{EncodingMode::Mean, 2, 2, false};
  EXPECT_EQ(preprocess(ds, mean_opt, mean)[1].x, (std::vector<double>{-0.5, 0.5, 0.5, -0.5}));
  EXPECT_THROW(preprocess(ds, mean_opt), ConfigError);
}

TEST(Preprocess, AllZeroImageMapsToBasisZero) {
  RawDataset ds;
  ds.rows = ds.cols = 4;
  ds.pixels.assign(16, 0);
  ds.labels = {0};
  const auto p = preprocess(ds, EncodingMode::Vanilla, 4, 2);
  EXPECT_EQ(p[0].x[0], 1.0);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_EQ(p[0].x[i], 0.0);
}

TEST(Preprocess, LabelWithoutSlot) {
  const RawDataset ds = testing::synthetic_dataset({9}, 1, 1);
  EXPECT_THROW(preprocess(ds, EncodingMode::Vanilla, 4, 8), ConfigError);
}

TEST(Shard, ClassAssignmentFormula) {
  ShardSpec spec{2, 7, {0, 1, 2, 3, 4, 5, 6, 7}};
  EXPECT_EQ(spec.classes_for(0), (std::vector<int>{0, 1}));
  EXPECT_EQ(spec.classes_for(1), (std::vector<int>{2, 3}));
  EXPECT_EQ(spec.classes_for(4), (std::vector<int>{0, 1}));
  spec.m_classes = 4;
  EXPECT_EQ(spec.classes_for(1), (std::vector<int>{4, 5, 6, 7}));
  spec.m_classes = 8;
  for (int w = 0; w < 7; ++w) EXPECT_EQ(spec.classes_for(w).size(), 8u);
  spec.m_classes = 9;
  EXPECT_THROW(spec.classes_for(0), ConfigError);
  spec.m_classes = 2;
  EXPECT_THROW(spec.classes_for(7), ConfigError);
}

TEST(Shard, CoversEveryClassWhenWorkersTimesMReachesC) {
  for (int m = 1; m <= 8; ++m) {
    const ShardSpec spec{m, 7, {0, 1, 2, 3, 4, 5, 6, 7}};
    std::set<int> seen;
    for (int w = 0; w < 7; ++w) {
      for (int c : spec.classes_for(w)) seen.insert(c);
    }
    if (7 * m >= 8) {
      EXPECT_EQ(seen.size(), 8u) << "m=" << m;
    }
  }
}

TEST(Shard, SelectsExactlyTheAssignedClasses) {
  const RawDataset ds = testing::synthetic_dataset({0, 1, 2, 3, 4, 5, 6, 7}, 5, 2);
  const auto prepared = preprocess(ds, EncodingMode::Vanilla, 4, 8);
  const ShardSpec spec{2, 7, {0, 1, 2, 3, 4, 5, 6, 7}};
  const auto shard = cycle_m_shard(prepared, spec, 1);
  ASSERT_EQ(shard.size(), 10u);
  for (const auto& s : shard) EXPECT_TRUE(s.source_label == 2 || s.source_label == 3);
  const auto idx = cycle_m_shard_indices(prepared, spec, 1);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(idx.size(), shard.size());
}

TEST(Shard, SubsampleIsSeededAndOrdered) {
  const auto a = subsample_positions(100, 20, 5, 3);
  EXPECT_EQ(a.size(), 20u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(a, subsample_positions(100, 20, 5, 3));
  EXPECT_NE(a, subsample_positions(100, 20, 5, 4));
  EXPECT_EQ(subsample_positions(10, 0, 1, 0).size(), 10u);
  EXPECT_EQ(subsample_positions(10, 50, 1, 0).size(), 10u);
}

TEST(Batches, PartitionAndDeterminism) {
  const auto b = batches(300, 128, 1, 0, 0);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].size(), 128u);
  EXPECT_EQ(b[1].size(), 128u);
  EXPECT_EQ(b[2].size(), 44u);
  std::vector<std::size_t> all;
  for (const auto& x : b) all.insert(all.end(), x.begin(), x.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> id(300);
  std::iota(id.begin(), id.end(), 0);
  EXPECT_EQ(all, id);
  EXPECT_EQ(b, batches(300, 128, 1, 0, 0));
  EXPECT_NE(b, batches(300, 128, 1, 0, 1));
  EXPECT_NE(b, batches(300, 128, 1, 1, 0));
  EXPECT_TRUE(batches(0, 128, 1, 0, 0).empty());
}

}  // namespace
}  // namespace bqfl::data
