// SPDX-License-Identifier: Apache-2.0
#include "fdisac/transceiver.hpp"

#include <algorithm>
#include <cmath>

#include "fdisac/errors.hpp"
#include "fdisac/random.hpp"

namespace fdisac {
namespace {

void check_power(const BeamformerSet& set) {
  const double radiated = set.radiated_power();
  if (radiated > set.tx_power_w * (1.0 + 1e-9) + 1e-300) {
    throw ConstraintViolation("transmit: ||V_RF V_BB||_F^2 exceeds P_b");
  }
}

void check_set_shapes(const BeamformerSet& set) {
  const auto n_rf = set.v_rf.assembled.cols();
  const auto m_rf = set.w_rf.assembled.cols();
  if (set.v_bb.rows() != n_rf) throw InvalidArgument("BeamformerSet: V_BB rows != N_RF");
  if (set.c_analog.rows() != m_rf || set.c_analog.cols() != n_rf ||
      set.d_digital.rows() != m_rf || set.d_digital.cols() != n_rf) {
    throw InvalidArgument("BeamformerSet: C_b/D_b must be M_RF x N_RF");
  }
}

}  // namespace

OfdmGrid make_symbol_grid(const OfdmParams& ofdm, int streams, std::uint64_t seed) {
  if (streams < 1) throw InvalidArgument("make_symbol_grid: streams must be >= 1");
  ofdm.validate();
  OfdmGrid grid(ofdm.subcarriers, ofdm.symbols, streams);
  Rng rng(seed);
  std::uniform_int_distribution<int> bits(0, 3);
  const double a = 1.0 / std::sqrt(2.0);
  auto v = grid.values();
  for (Eigen::Index c = 0; c < grid.cells(); ++c) {
    for (int s = 0; s < streams; ++s) {
      const int b = bits(rng);
      v(s, c) = Complex((b & 1) ? -a : a, (b & 2) ? -a : a);
    }
  }
  return grid;
}

OfdmGrid transmit(const OfdmGrid& symbols, const BeamformerSet& set) {
  if (symbols.space_dim() != set.v_bb.cols()) {
    throw InvalidArgument("transmit: symbol streams != V_BB columns");
  }
  if (set.v_bb.rows() != set.v_rf.assembled.cols()) {
    throw InvalidArgument("transmit: V_BB rows != N_RF");
  }
  check_power(set);
  return OfdmGrid(symbols.subcarriers(), symbols.symbols(), set.precoder() * symbols.data());
}

CMatrix effective_si_channel(const CMatrix& si_channel, const AnalogBeamformer& v_rf,
                             const AnalogBeamformer& w_rf) {
  if (si_channel.rows() != w_rf.assembled.rows() || si_channel.cols() != v_rf.assembled.rows()) {
    throw InvalidArgument("effective_si_channel: H_bb must be M_b x N_b");
  }
  return w_rf.assembled.adjoint() * si_channel * v_rf.assembled;
}

OfdmGrid fd_receive(const OfdmGrid& x_grid, const OfdmGrid& echo, const CMatrix& si_channel,
                    const BeamformerSet& set, const OfdmGrid& symbols, double noise_floor_dbm,
                    std::uint64_t seed) {
  check_set_shapes(set);
  const auto m_b = set.w_rf.assembled.rows();
  const auto n_b = set.v_rf.assembled.rows();
  if (x_grid.space_dim() != n_b || echo.space_dim() != m_b ||
      si_channel.rows() != m_b || si_channel.cols() != n_b ||
      symbols.space_dim() != set.v_bb.cols()) {
    throw InvalidArgument("fd_receive: dimension mismatch");
  }
  if (x_grid.subcarriers() != echo.subcarriers() || x_grid.symbols() != echo.symbols() ||
      x_grid.cells() != symbols.cells()) {
    throw InvalidArgument("fd_receive: grid shapes differ");
  }

  CMatrix antenna = echo.data();
  antenna.noalias() += si_channel * x_grid.data();
  const double variance = dbm_to_watts(noise_floor_dbm);
  if (variance > 0.0) {
    Rng rng(seed);
    antenna += complex_gaussian_matrix(m_b, antenna.cols(), variance, rng);
  }
  CMatrix combined = set.w_rf.assembled.adjoint() * antenna;
  combined.noalias() += (set.c_analog + set.d_digital) * set.v_bb * symbols.data();
  return OfdmGrid(x_grid.subcarriers(), x_grid.symbols(), std::move(combined));
}

OfdmGrid simulate_fd_reception(const OfdmGrid& symbols, const std::vector<RadarTarget>& targets,
                               const OfdmParams& ofdm, const CMatrix& si_channel,
                               const BeamformerSet& set, const ArrayConfig& config,
                               double noise_floor_dbm, std::uint64_t seed) {
  check_set_shapes(set);
  if (symbols.subcarriers() != ofdm.subcarriers || symbols.symbols() != ofdm.symbols ||
      symbols.space_dim() != set.v_bb.cols()) {
    throw InvalidArgument("simulate_fd_reception: symbol grid does not match");
  }
  const CMatrix& w = set.w_rf.assembled;
  const CMatrix precoder = set.precoder();

  // Residual SI after analog beamforming and A/D cancellation.
  const CMatrix si_map =
      effective_si_channel(si_channel, set.v_rf, set.w_rf) * set.v_bb +
      (set.c_analog + set.d_digital) * set.v_bb;
  CMatrix combined = si_map * symbols.data();

  for (const auto& t : targets) {
    const CVector b = w.adjoint() *
                      steering(t.doa, config.m_rx(), config.element_spacing, config.wavelength);
    const Eigen::RowVectorXcd r =
        steering(t.doa, config.n_tx(), config.element_spacing, config.wavelength).adjoint() *
        precoder;
    Eigen::RowVectorXcd proj = r * symbols.data();
    proj.array() *= echo_modulation(t, ofdm).array();
    combined.noalias() += b * proj;
  }

  const double variance = dbm_to_watts(noise_floor_dbm);
  if (variance > 0.0) {
    Rng rng(seed);
    const CMatrix gram = w.adjoint() * w;
    const Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw RankDeficiency("simulate_fd_reception: W_RF^H W_RF is singular");
    }
    combined += llt.matrixL() *
                complex_gaussian_matrix(w.cols(), combined.cols(), variance, rng);
  }
  return OfdmGrid(ofdm.subcarriers, ofdm.symbols, std::move(combined));
}

OfdmGrid ue_receive(const OfdmGrid& x_grid, const CMatrix& h_dl, const CMatrix& w_ue,
                    double noise_floor_dbm, std::uint64_t seed) {
  if (h_dl.cols() != x_grid.space_dim() || w_ue.rows() != h_dl.rows()) {
    throw InvalidArgument("ue_receive: dimension mismatch");
  }
  CMatrix rx = h_dl * x_grid.data();
  const double variance = dbm_to_watts(noise_floor_dbm);
  if (variance > 0.0) {
    Rng rng(seed);
    rx += complex_gaussian_matrix(rx.rows(), rx.cols(), variance, rng);
  }
  return OfdmGrid(x_grid.subcarriers(), x_grid.symbols(), w_ue.adjoint() * rx);
}

double dl_rate(const CMatrix& h_dl, const BeamformerSet& set, const double noise_var) {
  const CMatrix& w = set.w_ue;
  if (w.rows() != h_dl.rows() || h_dl.cols() != set.v_rf.assembled.rows()) {
    throw InvalidArgument("dl_rate: dimension mismatch");
  }
  if (!(noise_var > 0.0)) throw InvalidArgument("dl_rate: noise variance must be positive");

  // det(I + A A^H (W^H W s2)^-1) = det(I + L^-1 A A^H L^-H / s2) with W^H W = L L^H,
  // which keeps the argument Hermitian positive definite.
  const CMatrix gram = w.adjoint() * w;
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double max_ev = eig.eigenvalues().maxCoeff();
  if (!(max_ev > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * max_ev) {
    throw RankDeficiency("dl_rate: W_u^H W_u is singular");
  }
  const Eigen::LLT<CMatrix> llt(gram);
  const CMatrix a = w.adjoint() * h_dl * set.precoder();
  const CMatrix b = llt.matrixL().solve(a);
  CMatrix m = CMatrix::Identity(w.cols(), w.cols());
  m.noalias() += b * b.adjoint() / noise_var;
  const Eigen::LLT<CMatrix> mllt(m);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    log_det += 2.0 * std::log2(std::real(mllt.matrixL()(i, i)));
  }
  return std::max(0.0, log_det);
}

}  // namespace fdisac
