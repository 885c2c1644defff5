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

#include "bqfl/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "bqfl/error.hpp"

namespace bqfl::analytics {
namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("metrics: bad number '" + std::string(field) + "' on line " +
                         std::to_string(line),
                     0);
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void BoundConstants::validate() const {
  if (!(mu > 0.0)) throw ArgumentError("bound: mu must be > 0");
  if (!(L_smooth >= mu)) throw ArgumentError("bound: L must be >= mu");
  if (sigma.empty() || sigma.size() != p.size()) {
    throw ArgumentError("bound: sigma and p must be nonempty and of equal length");
  }
  double sum_p = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ArgumentError("bound: p_k must be >= 0");
    sum_p += v;
  }
  if (std::abs(sum_p - 1.0) > 1e-9) throw ArgumentError("bound: p_k must sum to 1");
  for (double s : sigma) {
    if (!(s >= 0.0)) throw ArgumentError("bound: sigma_k must be >= 0");
  }
  if (!(Gamma >= 0.0) || !(G >= 0.0) || !(theta_gap >= 0.0)) {
    throw ArgumentError("bound: Gamma, G and theta_gap must be >= 0");
  }
  if (E_local < 1) throw ArgumentError("bound: E must be >= 1");
  if (T_rounds < 1) throw ArgumentError("bound: T must be >= 1");
}

double BoundConstants::gamma() const {
  return std::max(8.0 * kappa(), static_cast<double>(E_local));
}

double BoundConstants::B() const {
  double noise = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k) noise += p[k] * p[k] * sigma[k] * sigma[k];
  const double drift = static_cast<double>(E_local - 1);
  return noise + 6.0 * L_smooth * Gamma + 8.0 * drift * drift * G * G;
}

double BoundConstants::learning_rate(int t) const { return 2.0 / (mu * (gamma() + t)); }

double fedavg_bound(const BoundConstants& c) {
  c.validate();
  const double gamma = c.gamma();
  return c.kappa() / (gamma + (c.T_rounds - 1)) *
         (2.0 * c.B() / c.mu + c.mu * gamma / 2.0 * c.theta_gap);
}

double encoding_time(double vector_length, int n_qubits, double t_gate) {
  if (!(vector_length >= 0.0) || n_qubits < 0 || !(t_gate >= 0.0)) {
    throw ArgumentError("encoding_time: inputs must be >= 0");
  }
  return vector_length * n_qubits * t_gate;
}

TotalTimeBreakdown total_time_breakdown(const BoundConstants& c, const chain::StakeTable& stakes,
                                        const std::map<chain::DeviceId, double>& per_node_time,
                                        double vector_length, int n_qubits, double t_gate) {
  TotalTimeBreakdown out;
  out.convergence = fedavg_bound(c);
  out.block = chain::expected_block_time(stakes, per_node_time);
  out.encoding = encoding_time(vector_length, n_qubits, t_gate);
  out.total = out.convergence + out.block + out.encoding;
  return out;
}

double total_time_bound(const BoundConstants& c, const chain::StakeTable& stakes,
                        const std::map<chain::DeviceId, double>& per_node_time,
                        double vector_length, int n_qubits, double t_gate) {
  return total_time_breakdown(c, stakes, per_node_time, vector_length, n_qubits, t_gate).total;
}

double meta_experience(double d_rate, double uplink_error_rate, double vr_experience) {
  if (!(uplink_error_rate >= 0.0 && uplink_error_rate <= 1.0)) {
    throw ArgumentError("meta_experience: uplink error rate must lie in [0, 1]");
  }
  if (!(d_rate >= 0.0) || !(vr_experience >= 0.0)) {
    throw ArgumentError("meta_experience: rate and VR_e must be >= 0");
  }
  return d_rate * (1.0 - uplink_error_rate) * vr_experience;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, ptr);
}

std::size_t write_metrics(std::span<const MetricsRow> rows, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) {
    out << r.round << ',' << r.device_id << ',' << to_string(r.role) << ',' << to_string(r.mode)
        << ',' << format_real(r.train_loss) << ',' << format_real(r.train_acc) << ','
        << format_real(r.test_acc_top1) << ',' << format_real(r.comm_time_s) << ','
        << format_real(r.block_gen_time_s) << ',' << format_real(r.stake) << '\n';
  }
  return rows.size();
}

std::size_t write_metrics(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open metrics file " + path.string());
  const std::size_t n = write_metrics(rows, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for metrics file " + path.string());
  return n;
}

std::vector<MetricsRow> parse_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ParseError("metrics: missing or unexpected header", 0);
  }
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string_view> f = split(line, ',');
    if (f.size() != 10) {
      throw ParseError("metrics: expected 10 fields on line " + std::to_string(line_no), 0);
    }
    MetricsRow r;
    r.round = parse_number<std::int64_t>(f[0], line_no);
    r.device_id = parse_number<std::int64_t>(f[1], line_no);
    const auto role = parse_role(f[2]);
    const auto mode = parse_mode(f[3]);
    if (!role || !mode) throw ParseError("metrics: bad role/mode on line " + std::to_string(line_no), 0);
    r.role = *role;
    r.mode = *mode;
    r.train_loss = parse_number<double>(f[4], line_no);
    r.train_acc = parse_number<double>(f[5], line_no);
    r.test_acc_top1 = parse_number<double>(f[6], line_no);
    r.comm_time_s = parse_number<double>(f[7], line_no);
    r.block_gen_time_s = parse_number<double>(f[8], line_no);
    r.stake = parse_number<double>(f[9], line_no);
    rows.push_back(r);
  }
  return rows;
}

std::string metrics_file_name(Mode mode, std::uint64_t seed) {
  return std::string(to_string(mode)) + "_" + std::to_string(seed) + ".csv";
}

}  // namespace bqfl::analytics
