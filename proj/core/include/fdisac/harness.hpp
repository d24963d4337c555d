// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo runner. One run = scenario -> bootstrap slot (sector-sweep
// beams, full digital SI cancellation) -> MUSIC + delay/Doppler search ->
// joint optimisation -> DL rate with the optimised beams.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdisac/experiment_config.hpp"
#include "fdisac/optimizer.hpp"
#include "fdisac/scenario_io.hpp"
#include "fdisac/sensing.hpp"

namespace fdisac {

/// Per-target outcome in the units written to targets.csv. Estimate and
/// error fields are NaN for a missed target.
struct TargetRecord {
  int index = 0;
  bool is_dl = false;
  bool matched = false;
  double true_doa_deg = 0.0;
  double true_range_m = 0.0;
  double true_velocity_mps = 0.0;
  double est_doa_deg = 0.0;
  double est_range_m = 0.0;
  double est_velocity_mps = 0.0;
  double doa_error_deg = 0.0;
  double range_error_m = 0.0;
  double velocity_error_mps = 0.0;
  double relative_velocity_error = 0.0;
};

struct RunRecord {
  int run = 0;
  int power_index = 0;
  double tx_power_dbm = 0.0;
  std::uint64_t seed = 0;
  std::vector<TargetRecord> targets;
  int unmatched_estimates = 0;
  bool feasible = false;
  bool certified = false;  // feasible and passes the independent checker
  int alpha = 0;
  double dl_rate_bps_hz = 0.0;
  double ideal_dl_rate_bps_hz = 0.0;
  std::vector<double> residual_si_dbm;  // per RX chain, true SI channel

  int matched_count() const;
};

/// Optional by-products of a run for the debug dumps.
struct RunArtifacts {
  MusicSpectrum spectrum;
  std::optional<OptimizerResult> optimizer;
};

/// Slot-0 beams: sector-sweep analog beams, streams spread over the chains
/// at full power, C_b = 0 and D_b = -H~ (complete digital cancellation).
BeamformerSet bootstrap_beamformers(const ExperimentConfig& config, const CMatrix& si_channel,
                                    double tx_power_w);

RunRecord run_single(const ExperimentConfig& config, double tx_power_dbm, std::uint64_t seed,
                     RunArtifacts* artifacts = nullptr);

RunRecord run_with_scenario(const ExperimentConfig& config, const Scenario& scenario,
                            double tx_power_dbm, std::uint64_t seed,
                            RunArtifacts* artifacts = nullptr);

/// Scenario drawn by run_single for the given run seed.
Scenario scenario_for_run(const ExperimentConfig& config, std::uint64_t seed);

/// Rate of the same pipeline with the SI channel forced to zero and every
/// canceller tap available.
double ideal_rate_baseline(const Scenario& scenario, const ExperimentConfig& config,
                           const std::vector<double>& doas, const std::vector<double>& dl_doas,
                           double tx_power_w);

/// Run seed for run index `run` under master seed `master`.
std::uint64_t run_seed(std::uint64_t master, int run);

struct AggregateRow {
  double tx_power_dbm = 0.0;
  int runs = 0;
  double all_detected_fraction = 0.0;  // runs with every target matched
  double matched_fraction = 0.0;       // matched targets / all targets
  double rmse_doa_deg = 0.0;
  double rmse_range_m = 0.0;
  double rmse_velocity_mps = 0.0;
  double median_range_error_m = 0.0;
  double median_rel_velocity_error = 0.0;
  double p90_rel_velocity_error = 0.0;
  double mean_dl_rate = 0.0;
  double mean_ideal_rate = 0.0;
  double mean_rate_gap = 0.0;
  double feasible_fraction = 0.0;
  double certified_fraction = 0.0;  // certified / feasible, NaN if none feasible
  double mean_alpha = 0.0;
};

struct ExperimentReport {
  std::vector<RunRecord> records;  // power-major, then run index
  std::vector<AggregateRow> aggregates;
};

/// Aggregates per power point from records alone, in record order.
std::vector<AggregateRow> aggregate_records(const std::vector<RunRecord>& records,
                                            const std::vector<double>& tx_power_dbm);

/// Runs every (power, run) pair on `config.threads` workers. Results do not
/// depend on the thread count. If `write_outputs`, the output directory is
/// checked before any compute and the CSVs (plus enabled dumps) are written.
ExperimentReport run_experiment(const ExperimentConfig& config, bool write_outputs = true);

// CSV contract. Headers are fixed; numbers use %.17g so values round-trip.
extern const char* const kRecordsHeader;
extern const char* const kTargetsHeader;
extern const char* const kAggregateHeader;

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records);
void write_targets_csv(const std::string& path, const std::vector<RunRecord>& records);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);

/// Rebuilds records from records.csv + targets.csv.
std::vector<RunRecord> read_records_csv(const std::string& records_path,
                                        const std::string& targets_path);

/// Creates `dir` if needed and verifies a file can be written there.
void ensure_writable_dir(const std::string& dir);

}  // namespace fdisac
