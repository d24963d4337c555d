// SPDX-License-Identifier: Apache-2.0
#include "fdisac/array.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdisac/errors.hpp"

namespace fdisac {

void ArrayConfig::validate() const {
  if (n_rf_tx < 1 || n_per_chain_tx < 1 || m_rf_rx < 1 || m_per_chain_rx < 1 ||
      ue_antennas < 1 || streams < 1) {
    throw InvalidArgument("ArrayConfig: all counts must be >= 1");
  }
  if (streams > std::min(n_rf_tx, ue_antennas)) {
    throw InvalidArgument("ArrayConfig: streams must not exceed min(n_rf_tx, ue_antennas)");
  }
  if (!(element_spacing > 0.0) || !(wavelength > 0.0)) {
    throw InvalidArgument("ArrayConfig: element_spacing and wavelength must be positive");
  }
}

SteeringVector steering_vector(double angle, int n_elements, double spacing,
                               double wavelength) {
  return {angle, steering(angle, n_elements, spacing, wavelength)};
}

CVector steering(double angle, int n_elements, double spacing, double wavelength) {
  if (n_elements < 1) throw InvalidArgument("steering_vector: n_elements must be >= 1");
  if (!(spacing > 0.0)) throw InvalidArgument("steering_vector: spacing must be positive");
  if (!(wavelength > 0.0)) throw InvalidArgument("steering_vector: wavelength must be positive");

  const double phase_step = 2.0 * kPi / wavelength * spacing * std::sin(angle);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_elements));
  CVector a(n_elements);
  for (int m = 0; m < n_elements; ++m) {
    a[m] = std::polar(scale, phase_step * m);
  }
  return a;
}

int BeamCodebook::find(const CVector& v, double tol) const {
  for (int b = 0; b < size(); ++b) {
    if (beams[b].size() == v.size() && (beams[b] - v).cwiseAbs().maxCoeff() <= tol) {
      return b;
    }
  }
  return -1;
}

BeamCodebook dft_codebook(int bits, int n_elements) {
  if (bits < 1 || bits > 20) throw InvalidArgument("dft_codebook: bits must be in [1, 20]");
  if (n_elements < 1) throw InvalidArgument("dft_codebook: n_elements must be >= 1");

  const int count = 1 << bits;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_elements));
  BeamCodebook book;
  book.bits = bits;
  book.beams.reserve(count);
  for (int b = 0; b < count; ++b) {
    CVector beam(n_elements);
    for (int m = 0; m < n_elements; ++m) {
      // Reduce m*b modulo the codebook size first so the phase stays small.
      const long long k = (static_cast<long long>(m) * b) % count;
      beam[m] = std::polar(scale, -2.0 * kPi * static_cast<double>(k) / count);
    }
    book.beams.push_back(std::move(beam));
  }
  return book;
}

AnalogBeamformer assemble_block_diagonal(std::vector<CVector> per_chain_beams) {
  if (per_chain_beams.empty()) {
    throw InvalidArgument("assemble_block_diagonal: need at least one chain");
  }
  const Eigen::Index len = per_chain_beams.front().size();
  if (len == 0) throw InvalidArgument("assemble_block_diagonal: empty beam");
  for (const auto& b : per_chain_beams) {
    if (b.size() != len) {
      throw InvalidArgument("assemble_block_diagonal: ragged beam lengths");
    }
  }
  const auto chains = static_cast<Eigen::Index>(per_chain_beams.size());
  AnalogBeamformer out;
  out.assembled = CMatrix::Zero(chains * len, chains);
  for (Eigen::Index j = 0; j < chains; ++j) {
    out.assembled.block(j * len, j, len, 1) = per_chain_beams[j];
  }
  out.per_chain_beams = std::move(per_chain_beams);
  return out;
}

AnalogBeamformer beams_from_indices(const BeamCodebook& codebook,
                                    const std::vector<int>& indices) {
  std::vector<CVector> beams;
  beams.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= codebook.size()) {
      throw InvalidArgument("beams_from_indices: index " + std::to_string(idx) +
                            " outside codebook");
    }
    beams.push_back(codebook.beams[idx]);
  }
  return assemble_block_diagonal(std::move(beams));
}

std::vector<int> sector_sweep_indices(int chains, int codebook_size,
                                      int elements_per_chain) {
  if (chains < 1 || codebook_size < 1 || elements_per_chain < 1) {
    throw InvalidArgument("sector_sweep_indices: counts must be >= 1");
  }
  const int half_null = std::max(1, codebook_size / (2 * elements_per_chain));
  std::vector<int> idx(chains);
  for (int j = 0; j < chains; ++j) {
    const long long base = static_cast<long long>(j) * codebook_size / chains;
    idx[j] = static_cast<int>((base + (j % 2) * half_null) % codebook_size);
  }
  return idx;
}

}  // namespace fdisac
