// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth scenario generation and the three propagation paths seen by
// the full-duplex base station: radar echoes, the Rician self-interference
// channel and the clustered downlink channel.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fdisac/array.hpp"
#include "fdisac/ofdm.hpp"

namespace fdisac {

/// Point scatterer. Range/velocity and delay/Doppler are tied by the
/// monostatic two-way conventions tau = 2R/c and f_D = 2v/lambda.
struct RadarTarget {
  double doa = 0.0;       // radians
  double delay = 0.0;     // seconds
  double doppler = 0.0;   // Hz
  Complex reflection{};   // alpha_k
  double range = 0.0;     // meters
  double velocity = 0.0;  // m/s, positive = closing (positive Doppler)
  bool is_dl_scatterer = false;
  double dl_phase = 0.0;  // phase of beta_l when the target is a DL scatterer
};

double two_way_delay(double range);
double range_from_delay(double delay);
double doppler_from_velocity(double velocity, double wavelength);
double velocity_from_doppler(double doppler, double wavelength);

/// |alpha|^2 from the radar range equation, lambda^2 sigma G / ((4pi)^3 R^4).
/// `array_gain` is the TX x RX array gain stripped by the unit-norm steering
/// vectors (N_b * M_b for a coherent full aperture).
double reflection_power(double range, double wavelength, double rcs, double array_gain);

RadarTarget make_target(double doa, double range, double velocity, Complex reflection,
                        double wavelength);

/// Pins part of a target's ground truth; unset fields are drawn at random.
struct TargetAnchor {
  double doa_deg = 0.0;
  std::optional<double> range_m;
  std::optional<double> velocity_mps;
};

struct ScenarioLimits {
  double min_range_m = 0.0;  // exclusive when zero
  double max_range_m = 80.0;
  double max_speed_mps = kmh_to_mps(100.0);
  double min_doa_deg = -90.0;
  double max_doa_deg = 90.0;
  /// Minimum DoA spacing enforced when drawing free targets (0 = none).
  double min_doa_separation_deg = 0.0;
  double rcs_m2 = 1.0;
  bool include_array_gain = true;
};

struct ChannelParams {
  double si_rician_k_db = 35.0;
  double si_pathloss_db = 40.0;
  double dl_pathloss_db = 100.0;
  double noise_floor_dbm = -90.0;     // BS receiver, sigma_b^2
  double ue_noise_floor_dbm = -90.0;  // UE receiver, sigma_u^2
  double si_array_separation_m = 0.1;
};

struct ScenarioSpec {
  int k_targets = 6;
  int l_scatterers = 2;
  ScenarioLimits limits;
  ChannelParams channel;
  std::vector<TargetAnchor> anchors;  // applied to the first anchors.size() targets
  /// When set, delays and Dopplers are snapped to this grid's bin centres.
  std::optional<OfdmParams> on_grid;
};

struct Scenario {
  std::vector<RadarTarget> targets;
  int dl_scatterer_count = 0;
  CMatrix si_channel;  // H_{b,b}, M_b x N_b
  ChannelParams channel;
  std::uint64_t seed = 0;

  std::vector<RadarTarget> dl_scatterers() const;
};

/// Draws K targets (L of them DL scatterers) and the SI channel. Deterministic in `seed`.
Scenario generate_scenario(const ArrayConfig& config, const ScenarioSpec& spec,
                           std::uint64_t seed);

/// Seed used for the SI channel of a scenario with master seed `seed`.
std::uint64_t si_channel_seed(std::uint64_t scenario_seed);

/// Per-cell factor alpha e^{j2pi(q T_s f_D - p tau df)} of one target, in grid cell order.
Eigen::RowVectorXcd echo_modulation(const RadarTarget& target, const OfdmParams& ofdm);

/// y(p,q) = sum_k alpha_k e^{j2pi(q T_s f_D - p tau df)} a_M a_N^H x(p,q). Noise-free.
OfdmGrid radar_echo(const OfdmGrid& x_grid, const std::vector<RadarTarget>& targets,
                    const OfdmParams& ofdm, const ArrayConfig& config);

/// Deterministic near-field LOS phase matrix exp(j 2pi r_mn / lambda) between
/// parallel TX and RX ULAs `separation` meters apart.
CMatrix los_si_matrix(const ArrayConfig& config, double separation);

/// Rician SI channel sqrt(PL) (sqrt(k/(k+1)) H_LOS + sqrt(1/(k+1)) H_NLOS).
CMatrix rician_si_channel(const ArrayConfig& config, double k_factor_db, double pathloss_db,
                          std::uint64_t seed, double separation = 0.1);

/// H_{u,b} = sum_l beta_l a_{M_u}(theta_l) a_{N_b}^H(theta_l), |beta_l|^2 = PL / L.
CMatrix dl_channel(const std::vector<RadarTarget>& scatterers, const ArrayConfig& config,
                   double pathloss_db);

/// Adds i.i.d. CN(0, sigma^2) with sigma^2 the dBm value in watts.
OfdmGrid add_noise(const OfdmGrid& grid, double noise_floor_dbm, std::uint64_t seed);

}  // namespace fdisac
