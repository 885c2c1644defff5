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

// MNIST ingestion (IDX), preprocessing, and cycle-m sharding.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "bqfl/types.hpp"

namespace bqfl::data {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct RawDataset {
  int rows = 28;
  int cols = 28;
  std::vector<std::uint8_t> pixels;  // size() * rows * cols, row-major per image
  std::vector<std::uint8_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t image_size() const noexcept {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return std::span<const std::uint8_t>(pixels).subspan(i * image_size(), image_size());
  }

  bool operator==(const RawDataset&) const = default;
};

/// Decodes an IDX3 image file and IDX1 label file. Throws ParseError with
/// the failing byte offset on bad magic, truncation, count mismatch or a
/// label above 9.
RawDataset parse_idx(std::span<const std::uint8_t> image_file,
                     std::span<const std::uint8_t> label_file);

RawDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

std::vector<std::uint8_t> encode_idx_images(const RawDataset& ds);
std::vector<std::uint8_t> encode_idx_labels(const RawDataset& ds);

/// Drops samples whose label is in `remove`; order is preserved.
RawDataset class_filter(const RawDataset& ds, const std::set<int>& remove);

/// Per-class sample counts, index = label.
std::vector<std::size_t> class_counts(const RawDataset& ds);

enum class EncodingMode { Vanilla, Mean, Half };

std::string_view to_string(EncodingMode mode);
std::optional<EncodingMode> parse_encoding(std::string_view text);

/// Mean image of `ds` after scaling pixels to [0, 1].
std::vector<double> mean_image(const RawDataset& ds);

/// Bilinear resize without corner alignment: output pixel i samples the
/// source at (i + 0.5) * in / out - 0.5, clamped to the image.
std::vector<double> resize_bilinear(std::span<const double> image, int rows, int cols,
                                    int out_rows, int out_cols);

struct PreparedSample {
  std::vector<double> x;
  std::vector<double> y;  // one-hot
  int source_label = 0;

  int label() const { return static_cast<int>(argmax(y)); }
  LabeledView view() const { return {x, label()}; }
};

struct PreprocessOptions {
  EncodingMode mode = EncodingMode::Vanilla;
  int side = 16;
  int n_classes = 8;
  /// Scale the flattened vector to unit L2 norm (quantum path). An all-zero
  /// vector becomes the basis vector e_0, matching amplitude_encode.
  bool normalize = true;
};

std::vector<PreparedSample> preprocess(const RawDataset& ds, const PreprocessOptions& options,
                                       std::span<const double> train_mean = {});

/// Quantum-path preprocessing: resize to 2^(n/2) per side, unit norm.
/// Throws ConfigError for odd n_qubits or Mean mode without a mean image.
std::vector<PreparedSample> preprocess(const RawDataset& ds, EncodingMode mode, int n_qubits,
                                       int n_classes, std::span<const double> train_mean = {});

struct ShardSpec {
  int m_classes = 8;
  int n_workers = 7;
  std::vector<int> kept_classes{0, 1, 2, 3, 4, 5, 6, 7};

  void validate() const;
  /// kept[(w * m + j) mod C] for j < m.
  std::vector<int> classes_for(int worker) const;
};

std::vector<PreparedSample> cycle_m_shard(std::span<const PreparedSample> ds, const ShardSpec& spec,
                                          int worker);

/// Same selection as cycle_m_shard, as ascending indices into `ds`.
std::vector<std::size_t> cycle_m_shard_indices(std::span<const PreparedSample> ds,
                                               const ShardSpec& spec, int worker);

/// Deterministic subset of `count` samples (all when count is 0 or exceeds
/// the shard), in original order.
std::vector<PreparedSample> subsample(std::vector<PreparedSample> shard, std::size_t count,
                                      std::uint64_t seed, int worker);

/// Positions (into a shard of `n`) that subsample keeps, ascending.
std::vector<std::size_t> subsample_positions(std::size_t n, std::size_t count, std::uint64_t seed,
                                             int worker);

/// Shuffled index batches over a shard of `n` samples; the last batch may be
/// partial. The order depends only on (seed, worker, epoch).
std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size,
                                              std::uint64_t seed, int worker, int epoch);

std::vector<LabeledView> views(std::span<const PreparedSample> samples);

}  // namespace bqfl::data
