// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and its JSON form. Every key is optional and
// falls back to the 128x128 / 28 GHz defaults; unknown keys are rejected so
// typos fail loudly.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdisac/array.hpp"
#include "fdisac/channels.hpp"
#include "fdisac/ofdm.hpp"
#include "fdisac/optimizer.hpp"
#include "fdisac/sensing.hpp"

namespace fdisac {

struct ExperimentConfig {
  ArrayConfig array;
  double carrier_hz = 28e9;
  double spacing_wavelengths = 0.5;
  /// Sensing grid: P subcarriers by Q_sense symbols (one 1 ms subframe).
  OfdmParams ofdm = [] {
    OfdmParams o;
    o.symbols = 112;
    return o;
  }();
  ScenarioSpec scenario;
  bool on_grid = false;

  int n_taps = 16;
  double si_threshold_dbm = -30.0;
  int codebook_bits = 5;
  /// Additive Gaussian error on the SI estimate handed to the optimizer,
  /// as NMSE in dB. Unset means perfect SI knowledge.
  std::optional<double> si_estimate_nmse_db;

  MusicOptions music;
  DelayDopplerOptions delay_doppler;
  double association_threshold_deg = 3.0;
  /// 0: score the bootstrap-slot estimates, 1: re-sense with optimised beams.
  int sensing_slot = 0;

  std::vector<double> tx_power_dbm{30.0};
  int runs = 100;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";
  bool dump_spectrum = false;
  bool dump_optimizer = false;

  /// Applies carrier/spacing to the array config. Call after editing those.
  void sync_geometry();
  /// Throws InvalidArgument describing the first bad field.
  void validate() const;

  OptimizerConfig optimizer_config(double tx_power_w) const;
};

/// Reads a JSON config file. Throws IoError / InvalidArgument.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& config);

/// 128x128 arrays, 8 chains x 16, P = 792, Q_sense = 112, K = 6, L = 2.
ExperimentConfig full_scale_config();
/// The default config with the close 10/12 degree pair and the 80 m target pinned.
ExperimentConfig pinned_targets_config();
/// 32x32 arrays, 4 chains x 8, P = 128, Q_sense = 56, K = 3.
ExperimentConfig desk_scale_config();

}  // namespace fdisac
