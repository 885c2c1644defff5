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

#include "cli.hpp"

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "bqfl/analytics.hpp"
#include "bqfl/chain.hpp"
#include "bqfl/data.hpp"
#include "bqfl/error.hpp"
#include "bqfl/simulation.hpp"

namespace bqfl::cli {
namespace {

using analytics::format_real;

std::string join_reals(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_real(values[i]);
  }
  return s;
}

std::string join_ints(const std::vector<int>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(values[i]);
  }
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

// Maps exceptions onto the exit-code contract.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const IntegrityError& e) {
    err << "integrity error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::map<chain::DeviceId, double> constant_block_times(const config::RunConfig& cfg,
                                                       chain::StakeTable& stakes) {
  std::vector<chain::DeviceId> miners;
  for (int m = 0; m < cfg.n_miners; ++m) miners.push_back(cfg.n_workers + m);
  stakes = chain::StakeTable::uniform(miners, cfg.genesis_stake);
  std::map<chain::DeviceId, double> per_node;
  for (chain::DeviceId id : miners) per_node[id] = chain::block_time(cfg.t_create_s, cfg.latency_mean_s);
  return per_node;
}

}  // namespace

config::RunConfig resolve_config(const Command& cmd) {
  std::vector<std::pair<std::string, std::string>> overrides = cmd.overrides;
  if (cmd.seed) overrides.emplace_back("seed", std::to_string(*cmd.seed));
  if (cmd.out_dir) overrides.emplace_back("output_dir", *cmd.out_dir);
  return config::load_config_file(cmd.config_path, overrides);
}

int cmd_run(const Command& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig cfg = resolve_config(cmd);
    fed::Simulation sim(cfg, fed::load_datasets(cfg));
    out << "mode " << to_string(cfg.mode) << ", " << cfg.n_workers << " workers, " << cfg.n_miners
        << " miners, " << sim.model().param_count() << " parameters, "
        << sim.test_set().size() << " test samples\n";

    bool aborted = false;
    while (sim.rounds_completed() < cfg.rounds) {
      const fed::RoundOutcome r = sim.run_round();
      for (const std::string& e : r.events) err << e << '\n';
      if (r.status == fed::RoundStatus::Aborted) {
        aborted = true;
        break;
      }
      out << "round " << r.round << ": leader " << r.leader << ", accepted " << r.accepted << "/"
          << r.verdicts.size() << ", test_acc " << format_real(r.global_test_accuracy)
          << ", block_time_s " << format_real(r.block_time_s) << ", wall_s "
          << format_real(r.measured_seconds) << '\n';
    }

    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const std::string stem =
        std::string(to_string(cfg.mode)) + "_" + std::to_string(cfg.seed);
    const auto csv = dir / analytics::metrics_file_name(cfg.mode, cfg.seed);
    analytics::write_metrics(sim.metrics(), csv);
    sim.ledger().save(dir / (stem + ".chain"));
    write_text(dir / (stem + ".cfg"), config::to_text(cfg));
    out << "wrote " << csv.string() << ", " << (dir / (stem + ".chain")).string() << ", "
        << (dir / (stem + ".cfg")).string() << '\n';

    if (aborted) {
      err << "run aborted: a round had no accepted update\n";
      return kExitFailure;
    }
    out << "final global top-1 test accuracy: " << format_real(sim.test_accuracy()) << '\n';
    return kExitOk;
  });
}

int cmd_bounds(const Command& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig cfg = resolve_config(cmd);
    if (!cfg.bounds) throw ConfigError("bounds needs the bound_* constants in the config");
    const analytics::BoundConstants& c = *cfg.bounds;
    try {
      c.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }

    out << "# L=" << format_real(c.L_smooth) << " mu=" << format_real(c.mu) << " sigma="
        << join_reals(c.sigma) << " p=" << join_reals(c.p) << " Gamma=" << format_real(c.Gamma)
        << " G=" << format_real(c.G) << " E=" << c.E_local << " T=" << c.T_rounds
        << " theta_gap=" << format_real(c.theta_gap) << '\n';
    out << "# n_qubits=" << cfg.n_qubits << " t_gate_s=" << format_real(cfg.t_gate_s)
        << " t_create_s=" << format_real(cfg.t_create_s)
        << " latency_mean_s=" << format_real(cfg.latency_mean_s) << " miners=" << cfg.n_miners
        << '\n';

    chain::StakeTable stakes;
    const auto per_node = constant_block_times(cfg, stakes);
    const double vector_length = std::ldexp(1.0, cfg.n_qubits);
    const analytics::TotalTimeBreakdown t = analytics::total_time_breakdown(
        c, stakes, per_node, vector_length, cfg.n_qubits, cfg.t_gate_s);
    out << "convergence_bound " << format_real(t.convergence) << '\n';
    out << "encoding_time_s " << format_real(t.encoding) << '\n';
    out << "expected_block_time_s " << format_real(t.block) << '\n';
    out << "total_time_bound " << format_real(t.total) << '\n';
    out << "meta_experience "
        << format_real(analytics::meta_experience(cfg.meta_d_rate, cfg.meta_uplink_error,
                                                  cfg.meta_vr_e))
        << '\n';

    out << "T,convergence_bound\n";
    for (int T : {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}) {
      analytics::BoundConstants sweep = c;
      sweep.T_rounds = T;
      out << T << ',' << format_real(analytics::fedavg_bound(sweep)) << '\n';
    }
    return kExitOk;
  });
}

int cmd_inspect_data(const Command& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig cfg = resolve_config(cmd);
    const fed::Datasets raw = fed::load_datasets(cfg);
    const auto report = [&](const char* name, const data::RawDataset& ds) {
      const data::RawDataset kept = data::class_filter(ds, cfg.removed_classes);
      const auto before = data::class_counts(ds);
      const auto after = data::class_counts(kept);
      out << name << ": " << ds.size() << " samples, " << kept.size() << " after filter\n";
      out << "  class,before,after\n";
      for (int c = 0; c < 10; ++c) {
        if (before[c] == 0 && after[c] == 0) continue;
        out << "  " << c << ',' << before[c] << ',' << after[c] << '\n';
      }
    };
    report("train", raw.train);
    report("test", raw.test);

    fed::Simulation sim(cfg, raw);
    out << "shards (m=" << cfg.m_classes << ")\n";
    for (const fed::DeviceState& d : sim.devices()) {
      if (d.role != Role::Worker) continue;
      out << "  worker " << d.id << ": classes {" << join_ints(sim.shard_classes(static_cast<int>(d.id)))
          << "}, " << d.shard.size() << " samples\n";
    }
    return kExitOk;
  });
}

int cmd_inspect_chain(const Command& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream f(cmd.target, std::ios::binary);
    if (!f) {
      err << "cannot open " << cmd.target << '\n';
      return kExitFailure;
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(f),
                                          std::istreambuf_iterator<char>()};
    const chain::ChainVerdict verdict = chain::validate_chain_bytes(bytes);
    if (!verdict.ok) {
      out << "INVALID: first bad block " << verdict.first_bad.value_or(0) << " (" << verdict.reason
          << ")\n";
      return kExitFailure;
    }
    const chain::Ledger ledger = chain::Ledger::parse(bytes);
    out << "index,miner,updates,timestamp_s,hash\n";
    for (const chain::Block& b : ledger.blocks()) {
      out << b.index << ',' << b.miner_id << ',' << b.updates.size() << ','
          << format_real(b.timestamp_s) << ',' << chain::to_hex(b.block_hash) << '\n';
    }
    out << "OK: " << ledger.size() << " blocks\n";
    return kExitOk;
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blockchain quantum federated learning simulator", "bqfl"};
  app.require_subcommand(1);
  Command cmd;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  std::string out_dir;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cmd.config_path, "config file (key = value)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--set", sets, "key=value override, repeatable")->take_all();
  };
  CLI::App* run = app.add_subcommand("run", "run federated rounds");
  CLI::App* bounds = app.add_subcommand("bounds", "print the analytic bounds");
  CLI::App* inspect_data = app.add_subcommand("inspect-data", "class counts and shards");
  CLI::App* inspect_chain = app.add_subcommand("inspect-chain", "validate a ledger file");
  for (CLI::App* sub : {run, bounds, inspect_data}) add_common(sub);
  inspect_chain->add_option("file", cmd.target, "ledger file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  for (CLI::App* sub : {run, bounds, inspect_data}) {
    if (!sub->parsed()) continue;
    cmd.verb = sub->get_name();
    if (sub->count("--seed")) cmd.seed = seed;
    if (sub->count("--out")) cmd.out_dir = out_dir;
  }
  if (inspect_chain->parsed()) cmd.verb = "inspect-chain";
  try {
    for (const std::string& s : sets) cmd.overrides.push_back(config::split_assignment(s));
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (cmd.verb == "run") return cmd_run(cmd, out, err);
  if (cmd.verb == "bounds") return cmd_bounds(cmd, out, err);
  if (cmd.verb == "inspect-data") return cmd_inspect_data(cmd, out, err);
  return cmd_inspect_chain(cmd, out, err);
}

}  // namespace bqfl::cli
