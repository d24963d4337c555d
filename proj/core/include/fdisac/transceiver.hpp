// SPDX-License-Identifier: Apache-2.0
//
// Hybrid-precoded OFDM transmission, full-duplex reception with analog and
// digital SI cancellation, UE reception and the analytic DL rate.
#pragma once

#include <cstdint>
#include <vector>

#include "fdisac/array.hpp"
#include "fdisac/channels.hpp"
#include "fdisac/ofdm.hpp"

namespace fdisac {

struct BeamformerSet {
  AnalogBeamformer v_rf;  // N_b x N_b^RF
  CMatrix v_bb;           // N_b^RF x d_b
  AnalogBeamformer w_rf;  // M_b x M_b^RF
  CMatrix w_ue;           // M_u x d_b
  CMatrix c_analog;       // M_b^RF x N_b^RF
  CMatrix d_digital;      // M_b^RF x N_b^RF
  double tx_power_w = 1.0;

  /// V^RF V^BB, the N_b x d_b map from streams to antennas.
  CMatrix precoder() const { return v_rf.assembled * v_bb; }
  /// ||V^RF V^BB||_F^2, the transmit power for unit-power symbols.
  double radiated_power() const { return precoder().squaredNorm(); }
};

/// Unit-energy QPSK symbols, one row per stream.
OfdmGrid make_symbol_grid(const OfdmParams& ofdm, int streams, std::uint64_t seed);

/// x_{p,q} = V^RF V^BB s_{p,q}. Throws ConstraintViolation if ||V^RF V^BB||_F^2 > P_b.
OfdmGrid transmit(const OfdmGrid& symbols, const BeamformerSet& set);

/// Combined full-duplex receive grid over the M_b^RF chains:
///   (W^RF)^H (echo + H_bb x + n) + (C_b + D_b) V^BB s.
/// Noise is drawn per RX antenna from `seed`.
OfdmGrid fd_receive(const OfdmGrid& x_grid, const OfdmGrid& echo, const CMatrix& si_channel,
                    const BeamformerSet& set, const OfdmGrid& symbols, double noise_floor_dbm,
                    std::uint64_t seed);

/// (W^RF)^H H_bb V^RF, the effective SI channel after analog beamforming.
CMatrix effective_si_channel(const CMatrix& si_channel, const AnalogBeamformer& v_rf,
                             const AnalogBeamformer& w_rf);

/// Same signal model as transmit -> radar_echo -> fd_receive, evaluated in
/// stream/RF-chain space without materialising antenna-domain grids. The
/// noise (W^RF)^H n ~ CN(0, sigma^2 (W^RF)^H W^RF) is drawn directly in
/// RF-chain space, so it is distributed like fd_receive's noise but is not
/// the same realisation.
OfdmGrid simulate_fd_reception(const OfdmGrid& symbols, const std::vector<RadarTarget>& targets,
                               const OfdmParams& ofdm, const CMatrix& si_channel,
                               const BeamformerSet& set, const ArrayConfig& config,
                               double noise_floor_dbm, std::uint64_t seed);

/// r_{p,q} = W_u^H (H_ub x_{p,q} + z_{p,q}).
OfdmGrid ue_receive(const OfdmGrid& x_grid, const CMatrix& h_dl, const CMatrix& w_ue,
                    double noise_floor_dbm, std::uint64_t seed);

/// log2 det(I + W^H H V V^H H^H W (W^H W sigma^2)^-1) in bps/Hz.
/// Throws RankDeficiency when W_u^H W_u is singular.
double dl_rate(const CMatrix& h_dl, const BeamformerSet& set, double noise_var);

}  // namespace fdisac
