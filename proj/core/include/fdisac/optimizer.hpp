// SPDX-License-Identifier: Apache-2.0
//
// Joint analog/digital beamformer and SI canceller design: codebook beam
// search for radar gain and SI suppression, analog tap selection, and a
// water-filled digital precoder restricted to the weakest residual-SI
// subspace that keeps every RX chain under the ADC ceiling.
#pragma once

#include <iosfwd>
#include <vector>

#include "fdisac/array.hpp"
#include "fdisac/transceiver.hpp"

namespace fdisac {

struct VirtualChannels {
  CMatrix h_radar;       // M_b x N_b, sum_k a_M(theta_k) a_N^H(theta_k)
  CMatrix h_dl_virtual;  // M_u x N_b, sum_l a_Mu(theta_l) a_N^H(theta_l)
};

VirtualChannels make_virtual_channels(const std::vector<double>& doas,
                                      const std::vector<double>& dl_doas,
                                      const ArrayConfig& config);

struct OptimizerConfig {
  int n_taps = 16;               // analog SI canceller taps N
  double si_threshold_w = 1e-6;  // lambda_b, per RX chain
  double tx_power_w = 1.0;       // P_b
  double noise_var_w = 1e-12;    // sigma_u^2 seen by the water-filling
  /// Power gain applied to the unit-gain virtual DL channel when
  /// water-filling (nominal pathloss / L). Only the allocation depends on it.
  double dl_path_gain = 1.0;
  BeamCodebook tx_codebook;
  BeamCodebook rx_codebook;

  void validate(const ArrayConfig& config) const;
};

/// ||W^H H_R V^RF V^BB||^2 / (||(H~ + C + D) V^BB||^2 + ||W^RF||^2 sigma^2).
/// `si_effective` is H~ = W^H H_bb V^RF. Throws DegenerateNoise on a zero denominator.
double radar_snr(const BeamformerSet& set, const VirtualChannels& vc,
                 const CMatrix& si_effective, double noise_var);

/// ||W_u^H H_ub V^RF V^BB||^2 / (||W_u||^2 sigma^2).
double dl_snr(const BeamformerSet& set, const VirtualChannels& vc, double noise_var);

struct BeamSelection {
  AnalogBeamformer beams;
  std::vector<int> indices;  // codebook index per chain
};

/// Per-chain argmax of ||H_R[:, block j] v||^2; ties go to the lowest index.
BeamSelection select_tx_beams(const VirtualChannels& vc, const BeamCodebook& codebook,
                              const ArrayConfig& config);

/// Maximises ||W^H H_R V||^2 / ||W^H H_bb V||^2 over per-chain codebook beams.
BeamSelection select_rx_beams(const VirtualChannels& vc, const CMatrix& si_estimate,
                              const AnalogBeamformer& v_rf, const BeamCodebook& codebook,
                              const ArrayConfig& config);

struct Cancellation {
  CMatrix c_analog;
  CMatrix d_digital;
};

/// C_b cancels the first n_taps / M_RF columns of H~, D_b = -(H~ + C_b).
Cancellation design_cancellation(const CMatrix& si_effective, int n_taps);

/// p_i = max(0, mu - sigma^2 / g_i) with sum p_i = total_power. Modes with
/// zero gain get nothing; if every gain is zero the power is split evenly.
RVector water_filling(const RVector& gains, double total_power, double noise_var);

struct DigitalDesign {
  CMatrix v_bb;  // N_RF x d_b
  bool feasible = false;
  int alpha = 0;
  RVector row_residual_w;  // ||[(H~ + C_b) V^BB]_j||^2 per RX chain
};

/// Subspace loop over alpha = N_RF .. 2 on the right singular vectors of the
/// analog residual. When no alpha passes, the smallest-alpha precoder is
/// scaled down onto the ceiling and returned with feasible = false.
DigitalDesign design_digital_precoder(const CMatrix& si_analog_residual,
                                      const CMatrix& h_dl_effective, int streams,
                                      const OptimizerConfig& config);

/// First d_b left singular vectors of the virtual DL channel.
CMatrix ue_combiner(const CMatrix& h_dl_virtual, int streams);

struct OptimizerResult {
  BeamformerSet set;
  VirtualChannels vc;
  bool feasible = false;
  int alpha = 0;
  std::vector<int> tx_beams;
  std::vector<int> rx_beams;
  RVector row_residual_w;
};

OptimizerResult optimize(const std::vector<double>& doas, const std::vector<double>& dl_doas,
                         const CMatrix& si_estimate, const ArrayConfig& array,
                         const OptimizerConfig& config);

struct ConstraintReport {
  bool residual_ok = false;
  bool power_ok = false;
  bool codebook_ok = false;
  double max_residual_w = 0.0;
  double power_w = 0.0;

  bool ok() const { return residual_ok && power_ok && codebook_ok; }
};

/// Recomputes every constraint from the assembled matrices alone.
ConstraintReport check_constraints(const BeamformerSet& set, const CMatrix& si_channel,
                                   double si_threshold_w, const BeamCodebook& tx_codebook,
                                   const BeamCodebook& rx_codebook);

/// Beam indices, alpha and per-chain residual as a JSON object.
void write_optimizer_debug(std::ostream& out, const OptimizerResult& result);

}  // namespace fdisac
