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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "bqfl/error.hpp"
#include "bqfl/rng.hpp"

namespace bqfl::data {
namespace {

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[offset_ + i];
    offset_ += 4;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(offset_, n);
    offset_ += n;
    return out;
  }

  std::size_t offset() const { return offset_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - offset_ < n) {
      throw ParseError(std::string(what_) + ": truncated, need " + std::to_string(n) +
                           " more bytes",
                       offset_);
    }
  }

  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::size_t offset_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

RawDataset parse_idx(std::span<const std::uint8_t> image_file,
                     std::span<const std::uint8_t> label_file) {
  ByteReader images(image_file, "idx images");
  if (const std::uint32_t magic = images.u32(); magic != kIdxImageMagic) {
    throw ParseError("idx images: bad magic " + std::to_string(magic), 0);
  }
  const std::uint32_t n_images = images.u32();
  const std::uint32_t rows = images.u32();
  const std::uint32_t cols = images.u32();
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) {
    throw ParseError("idx images: implausible dimensions", 8);
  }

  ByteReader labels(label_file, "idx labels");
  if (const std::uint32_t magic = labels.u32(); magic != kIdxLabelMagic) {
    throw ParseError("idx labels: bad magic " + std::to_string(magic), 0);
  }
  const std::uint32_t n_labels = labels.u32();
  if (n_labels != n_images) {
    throw ParseError("idx: " + std::to_string(n_images) + " images but " +
                         std::to_string(n_labels) + " labels",
                     4);
  }

  RawDataset ds;
  ds.rows = static_cast<int>(rows);
  ds.cols = static_cast<int>(cols);
  const auto pixel_bytes = images.take(static_cast<std::size_t>(n_images) * rows * cols);
  ds.pixels.assign(pixel_bytes.begin(), pixel_bytes.end());
  const std::size_t label_start = labels.offset();
  const auto label_bytes = labels.take(n_labels);
  for (std::size_t i = 0; i < label_bytes.size(); ++i) {
    if (label_bytes[i] > 9) {
      throw ParseError("idx labels: label " + std::to_string(label_bytes[i]) + " > 9",
                       label_start + i);
    }
  }
  ds.labels.assign(label_bytes.begin(), label_bytes.end());
  return ds;
}

RawDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const std::vector<std::uint8_t> image_bytes = read_file(images);
  const std::vector<std::uint8_t> label_bytes = read_file(labels);
  return parse_idx(image_bytes, label_bytes);
}

std::vector<std::uint8_t> encode_idx_images(const RawDataset& ds) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + ds.pixels.size());
  put_u32(out, kIdxImageMagic);
  put_u32(out, static_cast<std::uint32_t>(ds.size()));
  put_u32(out, static_cast<std::uint32_t>(ds.rows));
  put_u32(out, static_cast<std::uint32_t>(ds.cols));
  out.insert(out.end(), ds.pixels.begin(), ds.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const RawDataset& ds) {
  std::vector<std::uint8_t> out;
  put_u32(out, kIdxLabelMagic);
  put_u32(out, static_cast<std::uint32_t>(ds.size()));
  out.insert(out.end(), ds.labels.begin(), ds.labels.end());
  return out;
}

RawDataset class_filter(const RawDataset& ds, const std::set<int>& remove) {
  RawDataset out;
  out.rows = ds.rows;
  out.cols = ds.cols;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (remove.contains(ds.labels[i])) continue;
    const auto img = ds.image(i);
    out.pixels.insert(out.pixels.end(), img.begin(), img.end());
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

std::vector<std::size_t> class_counts(const RawDataset& ds) {
  std::vector<std::size_t> counts(10);
  for (std::uint8_t label : ds.labels) ++counts[label];
  return counts;
}

std::string_view to_string(EncodingMode mode) {
  switch (mode) {
    case EncodingMode::Vanilla: return "vanilla";
    case EncodingMode::Mean: return "mean";
    case EncodingMode::Half: return "half";
  }
  return "vanilla";
}

std::optional<EncodingMode> parse_encoding(std::string_view text) {
  if (text == "vanilla") return EncodingMode::Vanilla;
  if (text == "mean") return EncodingMode::Mean;
  if (text == "half") return EncodingMode::Half;
  return std::nullopt;
}

std::vector<double> mean_image(const RawDataset& ds) {
  std::vector<double> mean(ds.image_size());
  if (ds.size() == 0) return mean;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto img = ds.image(i);
    for (std::size_t p = 0; p < img.size(); ++p) mean[p] += img[p] / 255.0;
  }
  for (double& v : mean) v /= static_cast<double>(ds.size());
  return mean;
}

std::vector<double> resize_bilinear(std::span<const double> image, int rows, int cols,
                                    int out_rows, int out_cols) {
  if (rows < 1 || cols < 1 || out_rows < 1 || out_cols < 1 ||
      image.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionError("resize_bilinear: bad dimensions");
  }
  struct Tap {
    int lo, hi;
    double frac;
  };
  const auto taps = [](int in, int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (int i = 0; i < out; ++i) {
      const double pos = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
      const int lo = static_cast<int>(std::floor(pos));
      t[i] = {lo, std::min(lo + 1, in - 1), pos - lo};
    }
    return t;
  };
  const std::vector<Tap> ty = taps(rows, out_rows);
  const std::vector<Tap> tx = taps(cols, out_cols);
  const auto at = [&](int r, int c) { return image[static_cast<std::size_t>(r) * cols + c]; };

  std::vector<double> out(static_cast<std::size_t>(out_rows) * out_cols);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      const Tap& y = ty[r];
      const Tap& x = tx[c];
      const double top = at(y.lo, x.lo) * (1.0 - x.frac) + at(y.lo, x.hi) * x.frac;
      const double bottom = at(y.hi, x.lo) * (1.0 - x.frac) + at(y.hi, x.hi) * x.frac;
      out[static_cast<std::size_t>(r) * out_cols + c] = top * (1.0 - y.frac) + bottom * y.frac;
    }
  }
  return out;
}

std::vector<PreparedSample> preprocess(const RawDataset& ds, const PreprocessOptions& options,
                                       std::span<const double> train_mean) {
  if (options.side < 1) throw ConfigError("preprocess: side must be positive");
  if (options.n_classes < 1) throw ConfigError("preprocess: n_classes must be positive");
  if (options.mode == EncodingMode::Mean && train_mean.size() != ds.image_size()) {
    throw ConfigError("preprocess: mean encoding needs a training mean image of " +
                      std::to_string(ds.image_size()) + " pixels");
  }
  std::vector<PreparedSample> out;
  out.reserve(ds.size());
  std::vector<double> scaled(ds.image_size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int label = ds.labels[i];
    if (label >= options.n_classes) {
      throw ConfigError("preprocess: label " + std::to_string(label) + " has no one-hot slot among " +
                        std::to_string(options.n_classes) + " classes");
    }
    const auto img = ds.image(i);
    for (std::size_t p = 0; p < img.size(); ++p) {
      double v = img[p] / 255.0;
      if (options.mode == EncodingMode::Mean) v -= train_mean[p];
      if (options.mode == EncodingMode::Half) v -= 0.5;
      scaled[p] = v;
    }
    PreparedSample sample;
    sample.x = resize_bilinear(scaled, ds.rows, ds.cols, options.side, options.side);
    if (options.normalize) {
      double sum = 0.0;
      for (double v : sample.x) sum += v * v;
      if (sum == 0.0) {
        sample.x[0] = 1.0;
      } else {
        const double inv = 1.0 / std::sqrt(sum);
        for (double& v : sample.x) v *= inv;
      }
    }
    sample.y.assign(static_cast<std::size_t>(options.n_classes), 0.0);
    sample.y[static_cast<std::size_t>(label)] = 1.0;
    sample.source_label = label;
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<PreparedSample> preprocess(const RawDataset& ds, EncodingMode mode, int n_qubits,
                                       int n_classes, std::span<const double> train_mean) {
  if (n_qubits < 2 || n_qubits % 2 != 0) {
    throw ConfigError("preprocess: n_qubits must be even and >= 2, got " + std::to_string(n_qubits));
  }
  return preprocess(ds, PreprocessOptions{mode, 1 << (n_qubits / 2), n_classes, true}, train_mean);
}

void ShardSpec::validate() const {
  if (n_workers < 1) throw ConfigError("shard: n_workers must be >= 1");
  if (kept_classes.empty()) throw ConfigError("shard: no kept classes");
  if (m_classes < 1 || m_classes > static_cast<int>(kept_classes.size())) {
    throw ConfigError("shard: m_classes must lie in 1.." + std::to_string(kept_classes.size()));
  }
}

std::vector<int> ShardSpec::classes_for(int worker) const {
  validate();
  if (worker < 0 || worker >= n_workers) {
    throw ConfigError("shard: worker " + std::to_string(worker) + " out of range");
  }
  const auto c = static_cast<long long>(kept_classes.size());
  std::vector<int> out;
  for (int j = 0; j < m_classes; ++j) {
    out.push_back(kept_classes[static_cast<std::size_t>((static_cast<long long>(worker) * m_classes + j) % c)]);
  }
  return out;
}

std::vector<std::size_t> cycle_m_shard_indices(std::span<const PreparedSample> ds,
                                               const ShardSpec& spec, int worker) {
  const std::vector<int> classes = spec.classes_for(worker);
  const std::set<int> wanted(classes.begin(), classes.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (wanted.contains(ds[i].source_label)) out.push_back(i);
  }
  return out;
}

std::vector<PreparedSample> cycle_m_shard(std::span<const PreparedSample> ds, const ShardSpec& spec,
                                          int worker) {
  std::vector<PreparedSample> out;
  for (std::size_t i : cycle_m_shard_indices(ds, spec, worker)) out.push_back(ds[i]);
  return out;
}

std::vector<std::size_t> subsample_positions(std::size_t n, std::size_t count, std::uint64_t seed,
                                             int worker) {
  if (count == 0 || count >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  std::vector<std::size_t> order =
      Rng::substream(seed, Stream::ShardSample, {static_cast<std::uint64_t>(worker)}).permutation(n);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<PreparedSample> subsample(std::vector<PreparedSample> shard, std::size_t count,
                                      std::uint64_t seed, int worker) {
  std::vector<PreparedSample> out;
  for (std::size_t i : subsample_positions(shard.size(), count, seed, worker)) {
    out.push_back(std::move(shard[i]));
  }
  return out;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size,
                                              std::uint64_t seed, int worker, int epoch) {
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  const std::vector<std::size_t> order =
      Rng::substream(seed, Stream::BatchShuffle,
                     {static_cast<std::uint64_t>(worker), static_cast<std::uint64_t>(epoch)})
          .permutation(n);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<LabeledView> views(std::span<const PreparedSample> samples) {
  std::vector<LabeledView> out;
  out.reserve(samples.size());
  for (const PreparedSample& s : samples) out.push_back(s.view());
  return out;
}

}  // namespace bqfl::data
