// SPDX-License-Identifier: Apache-2.0
#include "fdisac/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "fdisac/errors.hpp"

namespace fdisac {

VirtualChannels make_virtual_channels(const std::vector<double>& doas,
                                      const std::vector<double>& dl_doas,
                                      const ArrayConfig& config) {
  config.validate();
  VirtualChannels vc;
  vc.h_radar = CMatrix::Zero(config.m_rx(), config.n_tx());
  vc.h_dl_virtual = CMatrix::Zero(config.ue_antennas, config.n_tx());
  const double d = config.element_spacing;
  const double lam = config.wavelength;
  for (double t : doas) {
    vc.h_radar.noalias() +=
        steering(t, config.m_rx(), d, lam) * steering(t, config.n_tx(), d, lam).adjoint();
  }
  for (double t : dl_doas) {
    vc.h_dl_virtual.noalias() +=
        steering(t, config.ue_antennas, d, lam) * steering(t, config.n_tx(), d, lam).adjoint();
  }
  return vc;
}

void OptimizerConfig::validate(const ArrayConfig& config) const {
  if (n_taps < 0 || n_taps > config.n_rf_tx * config.m_rf_rx) {
    throw InvalidArgument("OptimizerConfig: n_taps must lie in [0, N_RF * M_RF]");
  }
  if (n_taps % config.m_rf_rx != 0) {
    throw InvalidArgument("OptimizerConfig: n_taps must be a multiple of M_RF");
  }
  if (!(si_threshold_w > 0.0)) throw InvalidArgument("OptimizerConfig: lambda_b must be > 0");
  if (!(tx_power_w >= 0.0)) throw InvalidArgument("OptimizerConfig: P_b must be >= 0");
  if (!(noise_var_w > 0.0)) throw InvalidArgument("OptimizerConfig: noise variance must be > 0");
  if (!(dl_path_gain > 0.0)) throw InvalidArgument("OptimizerConfig: dl_path_gain must be > 0");
  if (tx_codebook.size() == 0 || tx_codebook.beam_length() != config.n_per_chain_tx) {
    throw InvalidArgument("OptimizerConfig: TX codebook beam length != N^A");
  }
  if (rx_codebook.size() == 0 || rx_codebook.beam_length() != config.m_per_chain_rx) {
    throw InvalidArgument("OptimizerConfig: RX codebook beam length != M^A");
  }
}

double radar_snr(const BeamformerSet& set, const VirtualChannels& vc,
                 const CMatrix& si_effective, double noise_var) {
  const CMatrix& w = set.w_rf.assembled;
  const double num = (w.adjoint() * vc.h_radar * set.precoder()).squaredNorm();
  const double si =
      ((si_effective + set.c_analog + set.d_digital) * set.v_bb).squaredNorm();
  const double den = si + w.squaredNorm() * noise_var;
  if (!(den > 0.0)) throw DegenerateNoise("radar_snr: interference-plus-noise is zero");
  return num / den;
}

double dl_snr(const BeamformerSet& set, const VirtualChannels& vc, double noise_var) {
  const double wn = set.w_ue.squaredNorm();
  if (!(wn > 0.0)) throw InvalidArgument("dl_snr: W_u is zero");
  if (!(noise_var > 0.0)) throw DegenerateNoise("dl_snr: noise variance is zero");
  const double num = (set.w_ue.adjoint() * vc.h_dl_virtual * set.precoder()).squaredNorm();
  return num / (wn * noise_var);
}

namespace {

CMatrix codebook_matrix(const BeamCodebook& codebook) {
  CMatrix m(codebook.beam_length(), codebook.size());
  for (int b = 0; b < codebook.size(); ++b) m.col(b) = codebook.beams[b];
  return m;
}

// Lowest index wins ties.
int argmax(const RVector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

BeamSelection select_tx_beams(const VirtualChannels& vc, const BeamCodebook& codebook,
                              const ArrayConfig& config) {
  if (codebook.size() == 0) throw InvalidArgument("select_tx_beams: empty codebook");
  const int len = config.n_per_chain_tx;
  if (codebook.beam_length() != len || vc.h_radar.cols() != config.n_tx()) {
    throw InvalidArgument("select_tx_beams: codebook/channel size mismatch");
  }
  const CMatrix books = codebook_matrix(codebook);
  BeamSelection sel;
  for (int j = 0; j < config.n_rf_tx; ++j) {
    const CMatrix gains = vc.h_radar.middleCols(j * len, len) * books;
    sel.indices.push_back(argmax(gains.colwise().squaredNorm().transpose()));
  }
  sel.beams = beams_from_indices(codebook, sel.indices);
  return sel;
}

BeamSelection select_rx_beams(const VirtualChannels& vc, const CMatrix& si_estimate,
                              const AnalogBeamformer& v_rf, const BeamCodebook& codebook,
                              const ArrayConfig& config) {
  if (codebook.size() == 0) throw InvalidArgument("select_rx_beams: empty codebook");
  const int len = config.m_per_chain_rx;
  const int chains = config.m_rf_rx;
  if (codebook.beam_length() != len || si_estimate.rows() != config.m_rx() ||
      si_estimate.cols() != v_rf.assembled.rows() || vc.h_radar.rows() != config.m_rx()) {
    throw InvalidArgument("select_rx_beams: size mismatch");
  }
  const CMatrix books = codebook_matrix(codebook);
  const CMatrix radar = vc.h_radar * v_rf.assembled;
  const CMatrix si = si_estimate * v_rf.assembled;
  const int nb = codebook.size();

  // Both objectives separate over chains: row j of W^H X only involves w_j.
  std::vector<RVector> num(chains), den(chains);
  for (int j = 0; j < chains; ++j) {
    num[j] = (books.adjoint() * radar.middleRows(j * len, len)).rowwise().squaredNorm();
    den[j] = (books.adjoint() * si.middleRows(j * len, len)).rowwise().squaredNorm();
  }

  std::vector<int> idx(chains, 0);
  std::vector<std::vector<int>> zero_beams(chains);
  bool all_have_zero = true;
  for (int j = 0; j < chains; ++j) {
    for (int b = 0; b < nb; ++b) {
      if (den[j][b] == 0.0) zero_beams[j].push_back(b);
    }
    all_have_zero = all_have_zero && !zero_beams[j].empty();
  }

  if (all_have_zero) {
    // An SI-free tuple exists; its ratio is infinite, so only the numerator
    // is left to maximise among SI-free beams.
    for (int j = 0; j < chains; ++j) {
      int best = zero_beams[j].front();
      for (int b : zero_beams[j]) {
        if (num[j][b] > num[j][best]) best = b;
      }
      idx[j] = best;
    }
  } else {
    // Dinkelbach: the ratio of sums is maximised exactly by repeatedly
    // maximising sum_j (num_j - lambda den_j), which is separable.
    auto totals = [&](const std::vector<int>& s) {
      double n = 0.0, d = 0.0;
      for (int j = 0; j < chains; ++j) {
        n += num[j][s[j]];
        d += den[j][s[j]];
      }
      return std::pair{n, d};
    };
    auto [n0, d0] = totals(idx);
    double lambda = d0 > 0.0 ? n0 / d0 : 0.0;
    if (d0 == 0.0) {
      // Beam 0 is SI-free on every chain yet some chain has no SI-free
      // beam: impossible, since then all_have_zero would hold.
      throw std::logic_error("select_rx_beams: inconsistent zero-denominator state");
    }
    for (int iter = 0; iter < 200; ++iter) {
      std::vector<int> next(chains);
      for (int j = 0; j < chains; ++j) {
        next[j] = argmax(num[j] - lambda * den[j]);
      }
      const auto [n1, d1] = totals(next);
      if (!(d1 > 0.0)) break;
      const double r1 = n1 / d1;
      if (!(r1 > lambda * (1.0 + 1e-14))) break;
      idx = next;
      lambda = r1;
    }
  }
  BeamSelection sel;
  sel.indices = idx;
  sel.beams = beams_from_indices(codebook, idx);
  return sel;
}

Cancellation design_cancellation(const CMatrix& si_effective, int n_taps) {
  const auto m_rf = si_effective.rows();
  const auto n_rf = si_effective.cols();
  if (n_taps < 0 || n_taps > m_rf * n_rf) {
    throw InvalidArgument("design_cancellation: n_taps must lie in [0, N_RF * M_RF]");
  }
  if (m_rf == 0 || n_taps % m_rf != 0) {
    throw InvalidArgument("design_cancellation: n_taps must be a multiple of M_RF");
  }
  const auto cols = n_taps / m_rf;
  Cancellation out;
  out.c_analog = CMatrix::Zero(m_rf, n_rf);
  out.c_analog.leftCols(cols) = -si_effective.leftCols(cols);
  out.d_digital = -(si_effective + out.c_analog);
  return out;
}

RVector water_filling(const RVector& gains, double total_power, double noise_var) {
  const auto n = gains.size();
  RVector p = RVector::Zero(n);
  if (n == 0 || !(total_power > 0.0)) return p;
  if (!(noise_var > 0.0)) throw InvalidArgument("water_filling: noise variance must be > 0");

  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    if (gains[i] > 0.0) order.push_back(i);
  }
  if (order.empty()) {
    p.setConstant(total_power / static_cast<double>(n));
    return p;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gains[a] > gains[b]; });
  // Largest active set whose water level clears every member's floor.
  double mu = 0.0;
  std::size_t active = order.size();
  for (; active >= 1; --active) {
    double floors = 0.0;
    for (std::size_t k = 0; k < active; ++k) floors += noise_var / gains[order[k]];
    mu = (total_power + floors) / static_cast<double>(active);
    if (mu > noise_var / gains[order[active - 1]]) break;
  }
  for (std::size_t k = 0; k < active; ++k) {
    p[order[k]] = mu - noise_var / gains[order[k]];
  }
  // Remove rounding drift so the budget holds exactly to double precision.
  const double sum = p.sum();
  if (sum > 0.0) p *= total_power / sum;
  return p;
}

CMatrix ue_combiner(const CMatrix& h_dl_virtual, int streams) {
  if (streams < 1 || streams > h_dl_virtual.rows()) {
    throw InvalidArgument("ue_combiner: streams must lie in [1, M_u]");
  }
  const Eigen::JacobiSVD<CMatrix> svd(h_dl_virtual, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(streams);
}

namespace {

RVector row_residuals(const CMatrix& residual, const CMatrix& v_bb) {
  return (residual * v_bb).rowwise().squaredNorm();
}

CMatrix subspace_precoder(const CMatrix& f, const CMatrix& h_dl_effective, int streams,
                          const OptimizerConfig& config) {
  const CMatrix he = h_dl_effective * f;
  const Eigen::JacobiSVD<CMatrix> svd(he, Eigen::ComputeFullV);
  const auto modes = std::min<Eigen::Index>(
      {static_cast<Eigen::Index>(streams), f.cols(), svd.singularValues().size()});
  RVector gains(modes);
  for (Eigen::Index i = 0; i < modes; ++i) {
    const double s = svd.singularValues()[i];
    gains[i] = config.dl_path_gain * s * s;
  }
  const RVector p = water_filling(gains, config.tx_power_w, config.noise_var_w);
  CMatrix g = CMatrix::Zero(f.cols(), streams);
  for (Eigen::Index i = 0; i < modes; ++i) {
    g.col(i) = std::sqrt(p[i]) * svd.matrixV().col(i);
  }
  if (modes == 0 && config.tx_power_w > 0.0) {
    // Degenerate channel: keep the budget on the first subspace direction.
    g(0, 0) = std::sqrt(config.tx_power_w);
  }
  return f * g;
}

}  // namespace

DigitalDesign design_digital_precoder(const CMatrix& si_analog_residual,
                                      const CMatrix& h_dl_effective, int streams,
                                      const OptimizerConfig& config) {
  const auto n_rf = si_analog_residual.cols();
  if (h_dl_effective.cols() != n_rf || streams < 1) {
    throw InvalidArgument("design_digital_precoder: dimension mismatch");
  }
  const Eigen::JacobiSVD<CMatrix> svd(si_analog_residual, Eigen::ComputeFullV);
  const CMatrix& b = svd.matrixV();  // descending singular values

  const int lowest = n_rf >= 2 ? 2 : 1;
  DigitalDesign out;
  CMatrix last;
  for (int alpha = static_cast<int>(n_rf); alpha >= lowest; --alpha) {
    const CMatrix v_bb = subspace_precoder(b.rightCols(alpha), h_dl_effective, streams, config);
    const RVector res = row_residuals(si_analog_residual, v_bb);
    last = v_bb;
    if (res.size() == 0 || res.maxCoeff() <= config.si_threshold_w) {
      out.v_bb = v_bb;
      out.feasible = true;
      out.alpha = alpha;
      out.row_residual_w = res;
      return out;
    }
  }
  // Failure branch: scale the last candidate onto the ceiling.
  const RVector res = row_residuals(si_analog_residual, last);
  const double worst = res.maxCoeff();
  out.v_bb = last * std::sqrt(config.si_threshold_w / worst);
  out.feasible = false;
  out.alpha = lowest;
  out.row_residual_w = row_residuals(si_analog_residual, out.v_bb);
  return out;
}

OptimizerResult optimize(const std::vector<double>& doas, const std::vector<double>& dl_doas,
                         const CMatrix& si_estimate, const ArrayConfig& array,
                         const OptimizerConfig& config) {
  if (doas.empty()) throw InvalidArgument("optimize: need at least one DoA");
  config.validate(array);
  if (si_estimate.rows() != array.m_rx() || si_estimate.cols() != array.n_tx()) {
    throw InvalidArgument("optimize: SI estimate must be M_b x N_b");
  }
  OptimizerResult out;
  out.vc = make_virtual_channels(doas, dl_doas, array);
  out.set.tx_power_w = config.tx_power_w;
  out.set.w_ue = ue_combiner(out.vc.h_dl_virtual, array.streams);

  const BeamSelection tx = select_tx_beams(out.vc, config.tx_codebook, array);
  const BeamSelection rx =
      select_rx_beams(out.vc, si_estimate, tx.beams, config.rx_codebook, array);
  out.tx_beams = tx.indices;
  out.rx_beams = rx.indices;
  out.set.v_rf = tx.beams;
  out.set.w_rf = rx.beams;

  const CMatrix h_eff = effective_si_channel(si_estimate, out.set.v_rf, out.set.w_rf);
  const Cancellation canc = design_cancellation(h_eff, config.n_taps);
  out.set.c_analog = canc.c_analog;
  out.set.d_digital = canc.d_digital;

  const CMatrix dl_eff = out.vc.h_dl_virtual * out.set.v_rf.assembled;
  const DigitalDesign dd =
      design_digital_precoder(h_eff + canc.c_analog, dl_eff, array.streams, config);
  out.set.v_bb = dd.v_bb;
  out.feasible = dd.feasible;
  out.alpha = dd.alpha;
  out.row_residual_w = dd.row_residual_w;
  return out;
}

namespace {

bool analog_in_codebook(const AnalogBeamformer& bf, const BeamCodebook& codebook) {
  const CMatrix& m = bf.assembled;
  const auto chains = m.cols();
  if (chains == 0 || m.rows() % chains != 0) return false;
  const auto len = m.rows() / chains;
  if (len != codebook.beam_length()) return false;
  for (Eigen::Index j = 0; j < chains; ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const bool in_block = i >= j * len && i < (j + 1) * len;
      if (!in_block && m(i, j) != Complex{}) return false;
    }
    if (codebook.find(m.block(j * len, j, len, 1), 1e-12) < 0) return false;
  }
  return true;
}

}  // namespace

ConstraintReport check_constraints(const BeamformerSet& set, const CMatrix& si_channel,
                                   double si_threshold_w, const BeamCodebook& tx_codebook,
                                   const BeamCodebook& rx_codebook) {
  ConstraintReport r;
  const CMatrix& v = set.v_rf.assembled;
  const CMatrix& w = set.w_rf.assembled;
  // Row residual of the analog stage, straight from the antenna-level channel.
  const CMatrix analog = w.adjoint() * si_channel * v + set.c_analog;
  const RVector rows = (analog * set.v_bb).rowwise().squaredNorm();
  r.max_residual_w = rows.size() ? rows.maxCoeff() : 0.0;
  r.residual_ok = r.max_residual_w <= si_threshold_w * (1.0 + 1e-9);
  r.power_w = (v * set.v_bb).squaredNorm();
  r.power_ok = r.power_w <= set.tx_power_w * (1.0 + 1e-9);
  r.codebook_ok = analog_in_codebook(set.v_rf, tx_codebook) &&
                  analog_in_codebook(set.w_rf, rx_codebook);
  return r;
}

void write_optimizer_debug(std::ostream& out, const OptimizerResult& result) {
  nlohmann::json j;
  j["feasible"] = result.feasible;
  j["alpha"] = result.alpha;
  j["tx_beams"] = result.tx_beams;
  j["rx_beams"] = result.rx_beams;
  std::vector<double> dbm;
  for (Eigen::Index i = 0; i < result.row_residual_w.size(); ++i) {
    dbm.push_back(watts_to_dbm(result.row_residual_w[i]));
  }
  j["residual_si_dbm"] = dbm;
  j["tx_power_w"] = result.set.tx_power_w;
  j["radiated_power_w"] = result.set.radiated_power();
  out << j.dump(2) << '\n';
}

}  // namespace fdisac
