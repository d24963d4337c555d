// SPDX-License-Identifier: Apache-2.0
//
// Uniform linear array geometry, steering vectors, DFT beam codebooks and the
// partially-connected (block-diagonal) analog beamformer layout.
#pragma once

#include <vector>

#include "fdisac/units.hpp"

namespace fdisac {

/// Antenna and RF-chain dimensions of the full-duplex base station and UE.
///
/// Total TX/RX antenna counts are derived from chains x elements-per-chain so
/// the partially-connected layout holds by construction.
struct ArrayConfig {
  int n_rf_tx = 8;          // TX RF chains
  int n_per_chain_tx = 16;  // TX antennas behind each chain
  int m_rf_rx = 8;          // RX RF chains
  int m_per_chain_rx = 16;  // RX antennas behind each chain
  int ue_antennas = 4;
  int streams = 4;  // d_b
  double wavelength = kSpeedOfLight / 28e9;
  double element_spacing = kSpeedOfLight / 28e9 / 2.0;

  int n_tx() const { return n_rf_tx * n_per_chain_tx; }
  int m_rx() const { return m_rf_rx * m_per_chain_rx; }

  /// Throws InvalidArgument when a count or length is out of range or
  /// streams exceeds min(n_rf_tx, ue_antennas).
  void validate() const;
};

struct SteeringVector {
  double angle = 0.0;  // radians from broadside
  CVector elements;
};

/// Unit-norm ULA response: element m is exp(j 2pi/lambda m d sin(angle)) / sqrt(n).
SteeringVector steering_vector(double angle, int n_elements, double spacing,
                               double wavelength);

/// Convenience for the common case where only the vector is needed.
CVector steering(double angle, int n_elements, double spacing, double wavelength);

/// Constant-modulus analog beams, card = 2^bits.
struct BeamCodebook {
  std::vector<CVector> beams;
  int bits = 0;

  int size() const { return static_cast<int>(beams.size()); }
  int beam_length() const {
    return beams.empty() ? 0 : static_cast<int>(beams.front().size());
  }
  /// Index of the beam equal to `v` within `tol` (max-abs), or -1.
  int find(const CVector& v, double tol = 1e-12) const;
};

/// Oversampled DFT codebook: beam b has element m = exp(-j 2pi m b / 2^bits) / sqrt(n).
BeamCodebook dft_codebook(int bits, int n_elements);

/// Block-diagonal analog beamformer. Column j holds per_chain_beams[j] in
/// rows [j*len, (j+1)*len) and zeros elsewhere.
struct AnalogBeamformer {
  std::vector<CVector> per_chain_beams;
  CMatrix assembled;

  int chains() const { return static_cast<int>(per_chain_beams.size()); }
  int per_chain() const {
    return per_chain_beams.empty() ? 0
                                   : static_cast<int>(per_chain_beams.front().size());
  }
};

AnalogBeamformer assemble_block_diagonal(std::vector<CVector> per_chain_beams);

/// Picks codebook beams by index for each chain and assembles them.
AnalogBeamformer beams_from_indices(const BeamCodebook& codebook,
                                    const std::vector<int>& indices);

/// Beam indices spread over the codebook, one per chain, alternating an
/// offset of half a beam spacing so that neighbouring chains never share
/// the same null grid. Used to illuminate/observe the whole field of view
/// before any target estimate exists.
std::vector<int> sector_sweep_indices(int chains, int codebook_size,
                                      int elements_per_chain);

}  // namespace fdisac
