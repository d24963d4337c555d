// SPDX-License-Identifier: Apache-2.0
//
// fdisac: command line front end for the Monte Carlo harness.
//
//   fdisac run      --config <file> [--runs R] [--seed S] [--out DIR]
//   fdisac sweep    --config <file> --power <start:step:stop>
//   fdisac replay   --scenario <file> [--config <file>] [--power P]... [--out DIR]
//   fdisac scenario --config <file> --run I --out <file>
//   fdisac preset   full|pinned|desk
//
// Exit status: 0 ok, 2 config/argument error, 3 I/O error, 1 anything else.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fdisac/errors.hpp"
#include "fdisac/harness.hpp"
#include "fdisac/scenario_io.hpp"

namespace {

using namespace fdisac;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::vector<double> parse_power_range(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw InvalidArgument("--power expects start:step:stop in dBm");
  }
  double start = 0.0, step = 0.0, stop = 0.0;
  try {
    start = std::stod(spec.substr(0, a));
    step = std::stod(spec.substr(a + 1, b - a - 1));
    stop = std::stod(spec.substr(b + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("--power: could not parse '" + spec + "'");
  }
  if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw InvalidArgument("--power: need step > 0 and stop >= start");
  }
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(start + i * step);
  return out;
}

void print_aggregates(const std::vector<AggregateRow>& rows) {
  std::printf("%10s %6s %9s %10s %10s %10s %9s %9s %9s\n", "P[dBm]", "runs", "detect",
              "rmseDoA", "medRngErr", "medRelVel", "rate", "ideal", "feasible");
  for (const auto& a : rows) {
    std::printf("%10.2f %6d %9.3f %10.4f %10.4f %10.5f %9.3f %9.3f %9.3f\n", a.tx_power_dbm,
                a.runs, a.all_detected_fraction, a.rmse_doa_deg, a.median_range_error_m,
                a.median_rel_velocity_error, a.mean_dl_rate, a.mean_ideal_rate,
                a.feasible_fraction);
  }
}

int cmd_run(ExperimentConfig config) {
  const ExperimentReport report = run_experiment(config);
  print_aggregates(report.aggregates);
  std::printf("wrote %s/{records,targets,aggregate}.csv\n", config.output_dir.c_str());
  return 0;
}

int cmd_replay(const std::string& scenario_path, const std::optional<std::string>& config_path,
               const std::vector<double>& powers, const std::optional<std::string>& out_dir) {
  ScenarioFile file;
  ExperimentConfig config;
  if (config_path) {
    config = load_experiment_config(*config_path);
    file = load_scenario(scenario_path, config.array);
  } else {
    file = load_scenario(scenario_path);
    config = file.config ? *file.config : full_scale_config();
  }
  if (!powers.empty()) config.tx_power_dbm = powers;
  if (out_dir) config.output_dir = *out_dir;
  if (static_cast<int>(file.scenario.targets.size()) != config.scenario.k_targets) {
    config.scenario.k_targets = static_cast<int>(file.scenario.targets.size());
  }
  config.validate();
  ensure_writable_dir(config.output_dir);

  std::vector<RunRecord> records;
  for (int pi = 0; pi < static_cast<int>(config.tx_power_dbm.size()); ++pi) {
    RunRecord r = run_with_scenario(config, file.scenario, config.tx_power_dbm[pi], file.run_seed);
    r.power_index = pi;
    records.push_back(std::move(r));
  }
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  write_records_csv((dir / "records.csv").string(), records);
  write_targets_csv((dir / "targets.csv").string(), records);
  const auto agg = aggregate_records(records, config.tx_power_dbm);
  write_aggregate_csv((dir / "aggregate.csv").string(), agg);
  print_aggregates(agg);
  return 0;
}

int cmd_scenario(const ExperimentConfig& config, int run, const std::string& out) {
  ScenarioFile file;
  file.run_seed = run_seed(config.seed, run);
  file.scenario = scenario_for_run(config, file.run_seed);
  file.config = config;
  save_scenario(out, file);
  std::printf("wrote %s (run %d, %zu targets)\n", out.c_str(), run,
              file.scenario.targets.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex mmWave ISAC link-level simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;

  auto* run = app.add_subcommand("run", "Monte Carlo runs at the configured power points");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--runs", runs, "Override the run count");
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string power_spec;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo runs over a transmit power range");
  sweep->add_option("--config", config_path, "JSON experiment config")->required();
  sweep->add_option("--power", power_spec, "start:step:stop in dBm")->required();
  sweep->add_option("--runs", runs, "Override the run count");
  sweep->add_option("--seed", seed, "Override the master seed");
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string scenario_path;
  std::optional<std::string> replay_config;
  std::vector<double> replay_powers;
  auto* replay = app.add_subcommand("replay", "Re-run a saved scenario");
  replay->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  replay->add_option("--config", replay_config, "Config (defaults to the embedded one)");
  replay->add_option("--power", replay_powers, "Transmit power(s) in dBm");
  replay->add_option("--out", out_dir, "Output directory");

  int scenario_run = 0;
  std::string scenario_out;
  auto* scen = app.add_subcommand("scenario", "Write the scenario of one run to a file");
  scen->add_option("--config", config_path, "JSON experiment config")->required();
  scen->add_option("--run", scenario_run, "Run index")->check(CLI::NonNegativeNumber);
  scen->add_option("--seed", seed, "Override the master seed");
  scen->add_option("--out", scenario_out, "Scenario file to write")->required();

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Print a built-in config as JSON");
  preset->add_option("name", preset_name, "full | pinned | desk")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto load = [&]() {
      ExperimentConfig c = load_experiment_config(config_path);
      if (runs) c.runs = *runs;
      if (seed) c.seed = *seed;
      if (threads) c.threads = *threads;
      if (out_dir) c.output_dir = *out_dir;
      c.validate();
      return c;
    };
    if (*run) return cmd_run(load());
    if (*sweep) {
      ExperimentConfig c = load();
      c.tx_power_dbm = parse_power_range(power_spec);
      c.validate();
      return cmd_run(c);
    }
    if (*replay) return cmd_replay(scenario_path, replay_config, replay_powers, out_dir);
    if (*scen) return cmd_scenario(load(), scenario_run, scenario_out);
    if (*preset) {
      ExperimentConfig c;
      if (preset_name == "full") {
        c = full_scale_config();
      } else if (preset_name == "pinned") {
        c = pinned_targets_config();
      } else if (preset_name == "desk") {
        c = desk_scale_config();
      } else {
        throw InvalidArgument("unknown preset '" + preset_name + "'");
      }
      std::cout << experiment_config_to_json(c) << '\n';
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
