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

// Closed-form delay and convergence calculators, plus the metrics CSV sink.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bqfl/chain.hpp"
#include "bqfl/types.hpp"

namespace bqfl::analytics {

/// Inputs of the FedAvg excess-risk bound for L-smooth, mu-strongly convex
/// local objectives with bounded gradient variance and norm.
struct BoundConstants {
  double L_smooth = 1.0;
  double mu = 1.0;
  std::vector<double> sigma;  // per-device gradient noise sigma_k
  std::vector<double> p;      // per-device weights p_k, sum 1
  double Gamma = 0.0;         // heterogeneity gap
  double G = 0.0;             // gradient norm bound
  int E_local = 1;            // local steps per round
  int T_rounds = 1;
  double theta_gap = 0.0;     // E||theta_1 - theta*||^2

  void validate() const;

  double kappa() const { return L_smooth / mu; }
  /// max{8 kappa, E}.
  double gamma() const;
  /// sum p_k^2 sigma_k^2 + 6 L Gamma + 8 (E - 1)^2 G^2.
  double B() const;
  /// Decaying step size 2 / (mu (gamma + t)).
  double learning_rate(int t) const;

  bool operator==(const BoundConstants&) const = default;
};

/// kappa / (gamma + T - 1) * (2B / mu + mu gamma / 2 * theta_gap).
double fedavg_bound(const BoundConstants& c);

/// t_T ~= L * n * t_gate for amplitude-encoding a length-L vector.
double encoding_time(double vector_length, int n_qubits, double t_gate);

struct TotalTimeBreakdown {
  double convergence = 0.0;
  double block = 0.0;
  double encoding = 0.0;
  double total = 0.0;
};

/// Sum of the convergence bound, expected block time and encoding time.
/// The three terms carry different units; they are added as stated.
TotalTimeBreakdown total_time_breakdown(const BoundConstants& c, const chain::StakeTable& stakes,
                                        const std::map<chain::DeviceId, double>& per_node_time,
                                        double vector_length, int n_qubits, double t_gate);

double total_time_bound(const BoundConstants& c, const chain::StakeTable& stakes,
                        const std::map<chain::DeviceId, double>& per_node_time,
                        double vector_length, int n_qubits, double t_gate);

/// D_rate * (1 - uplink_error_rate) * VR_e.
double meta_experience(double d_rate, double uplink_error_rate, double vr_experience);

struct MetricsRow {
  std::int64_t round = 0;
  std::int64_t device_id = 0;
  Role role = Role::Worker;
  Mode mode = Mode::BqflAvg;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc_top1 = 0.0;
  double comm_time_s = 0.0;
  double block_gen_time_s = 0.0;
  double stake = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

inline constexpr const char* kMetricsHeader =
    "round,device_id,role,mode,train_loss,train_acc,test_acc_top1,comm_time_s,block_gen_time_s,stake";

/// Shortest-round-trip-safe text for a double: 17 significant digits,
/// '.' separator, independent of locale.
std::string format_real(double value);

/// Header plus one line per row. Returns the row count.
std::size_t write_metrics(std::span<const MetricsRow> rows, std::ostream& out);
std::size_t write_metrics(std::span<const MetricsRow> rows, const std::filesystem::path& path);

std::vector<MetricsRow> parse_metrics(std::istream& in);

/// "<mode>_<seed>.csv"
std::string metrics_file_name(Mode mode, std::uint64_t seed);

}  // namespace bqfl::analytics
