// SPDX-License-Identifier: Apache-2.0
#include "fdisac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <tuple>

#include "fdisac/errors.hpp"

namespace fdisac {

CMatrix sample_covariance(const OfdmGrid& y_grid) {
  if (y_grid.cells() == 0 || y_grid.space_dim() == 0) {
    throw InvalidArgument("sample_covariance: empty grid");
  }
  const CMatrix& y = y_grid.data();
  CMatrix r = CMatrix::Zero(y.rows(), y.rows());
  r.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / static_cast<double>(y.cols()));
  // rankUpdate fills one triangle only.
  return r.selfadjointView<Eigen::Lower>();
}

EigenDecomposition hermitian_eigen_descending(const CMatrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw InvalidArgument("hermitian_eigen_descending: matrix must be square and nonempty");
  }
  const double scale = cov.norm();
  if ((cov - cov.adjoint()).norm() > 1e-10 * scale) {
    throw InvalidArgument("hermitian_eigen_descending: matrix is not Hermitian");
  }
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eigen_descending: eigensolver failed");
  }
  EigenDecomposition out;
  out.values = eig.eigenvalues().reverse();
  out.vectors = eig.eigenvectors().rowwise().reverse();
  return out;
}

MusicSpectrum music_spectrum(const CMatrix& cov, const AnalogBeamformer& w_rf, int k_targets,
                             double element_spacing, double wavelength,
                             const MusicOptions& options) {
  const auto m_rf = cov.rows();
  if (w_rf.assembled.cols() != m_rf) {
    throw InvalidArgument("music_spectrum: covariance size must equal the RF chain count");
  }
  if (k_targets < 0) throw InvalidArgument("music_spectrum: negative target count");
  if (k_targets >= m_rf) {
    throw SubspaceExhausted("music_spectrum: K must be smaller than M_b^RF");
  }
  if (!(options.grid_step > 0.0) || !(options.max_angle >= options.min_angle)) {
    throw InvalidArgument("music_spectrum: bad angle grid");
  }
  const EigenDecomposition eig = hermitian_eigen_descending(cov);
  const CMatrix u_n = eig.vectors.rightCols(m_rf - k_targets);

  const int count =
      static_cast<int>(std::floor((options.max_angle - options.min_angle) / options.grid_step +
                                  1e-9)) + 1;
  const int m_b = static_cast<int>(w_rf.assembled.rows());
  CMatrix a(m_b, count);
  MusicSpectrum out;
  out.grid_angles.resize(count);
  for (int i = 0; i < count; ++i) {
    out.grid_angles[i] = options.min_angle + i * options.grid_step;
    a.col(i) = steering(out.grid_angles[i], m_b, element_spacing, wavelength);
  }
  const CMatrix b = w_rf.assembled.adjoint() * a;
  const CMatrix proj = u_n.adjoint() * b;
  out.values.resize(count);
  for (int i = 0; i < count; ++i) {
    const double den = std::max(proj.col(i).squaredNorm(), std::numeric_limits<double>::min());
    const double num = options.normalize ? b.col(i).squaredNorm() : 1.0;
    out.values[i] = num / den;
  }

  const auto& v = out.values;
  std::vector<int> maxima;
  for (int i = 0; i < count; ++i) {
    const bool left = i == 0 || v[i] > v[i - 1];
    const bool right = i == count - 1 || v[i] >= v[i + 1];
    if (left && right) maxima.push_back(i);
  }
  std::stable_sort(maxima.begin(), maxima.end(),
                   [&](int x, int y) { return v[x] > v[y]; });
  if (static_cast<int>(maxima.size()) > k_targets) maxima.resize(k_targets);

  for (int i : maxima) {
    MusicPeak peak;
    peak.grid_index = i;
    peak.value = v[i];
    peak.angle = out.grid_angles[i];
    if (options.refine && i > 0 && i < count - 1) {
      const double l = 10.0 * std::log10(v[i - 1]);
      const double c = 10.0 * std::log10(v[i]);
      const double r = 10.0 * std::log10(v[i + 1]);
      const double curv = l - 2.0 * c + r;
      if (curv < 0.0) {
        const double delta = std::clamp(0.5 * (l - r) / curv, -0.5, 0.5);
        peak.angle += delta * options.grid_step;
      }
    }
    out.peaks.push_back(peak);
  }
  return out;
}

void write_spectrum_csv(std::ostream& out, const MusicSpectrum& spectrum) {
  out << "angle_deg,value\n";
  char buf[96];
  for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", rad_to_deg(spectrum.grid_angles[i]),
                  spectrum.values[i]);
    out << buf;
  }
}

QuotientGrid delay_doppler_quotient(const Eigen::RowVectorXcd& reference,
                                    const OfdmGrid& y_grid, const AnalogBeamformer& w_rf,
                                    double doa, double element_spacing, double wavelength,
                                    double guard) {
  const CMatrix& w = w_rf.assembled;
  const int m_b = static_cast<int>(w.rows());
  if (y_grid.space_dim() != w.cols()) {
    throw InvalidArgument("delay_doppler_quotient: y grid must live on the RF chains");
  }
  if (reference.size() != y_grid.cells()) {
    throw InvalidArgument("delay_doppler_quotient: reference length != cell count");
  }
  // (1/M_b) sum_i [W y]_i / (a_i c) = (kappa^T y) / (M_b c), kappa_j = sum_i W_ij / a_i.
  const CVector a = steering(doa, m_b, element_spacing, wavelength);
  const CVector inv_a = a.cwiseInverse();
  const Eigen::RowVectorXcd kappa = inv_a.transpose() * w;
  const Eigen::RowVectorXcd lifted = kappa * y_grid.data();

  const double peak_ref = reference.cwiseAbs().maxCoeff();
  if (!(peak_ref > 0.0)) {
    throw DegenerateReference("delay_doppler_quotient: reference signal is identically zero");
  }
  const double floor = guard * peak_ref;
  QuotientGrid z(y_grid.subcarriers(), y_grid.symbols());
  Eigen::Index used = 0;
  for (Eigen::Index c = 0; c < reference.size(); ++c) {
    const Complex g = reference[c];
    if (std::abs(g) < floor) {
      z.data()[c] = Complex{};
      continue;
    }
    z.data()[c] = lifted[c] / (static_cast<double>(m_b) * g);
    ++used;
  }
  if (used == 0) {
    throw DegenerateReference("delay_doppler_quotient: every reference entry is guarded out");
  }
  return z;
}

namespace {

DelayDopplerEstimate to_estimate(const LikelihoodPeak& peak, const OfdmParams& ofdm) {
  const int P = ofdm.subcarriers;
  double nu = peak.delay_index;
  if (nu >= P) nu -= P;
  DelayDopplerEstimate est;
  est.peak = peak;
  est.delay = nu / (P * ofdm.subcarrier_spacing);
  est.doppler = peak.doppler_index / (ofdm.symbols * ofdm.symbol_duration());
  return est;
}

void check_grid(const OfdmGrid& y_grid, const OfdmParams& ofdm) {
  if (y_grid.subcarriers() != ofdm.subcarriers || y_grid.symbols() != ofdm.symbols) {
    throw InvalidArgument("estimate_delay_doppler: grid does not match OfdmParams");
  }
}

}  // namespace

std::vector<DelayDopplerEstimate> estimate_delay_doppler(
    const OfdmGrid& symbols, const CMatrix& precoder, const OfdmGrid& y_grid,
    const AnalogBeamformer& w_rf, const std::vector<double>& doas, const OfdmParams& ofdm,
    double element_spacing, double wavelength, const DelayDopplerOptions& options) {
  check_grid(y_grid, ofdm);
  if (symbols.cells() != y_grid.cells() || precoder.cols() != symbols.space_dim()) {
    throw InvalidArgument("estimate_delay_doppler: symbols/precoder mismatch");
  }
  std::vector<DelayDopplerEstimate> out;
  out.reserve(doas.size());
  const int n_b = static_cast<int>(precoder.rows());
  for (double doa : doas) {
    const Eigen::RowVectorXcd r =
        steering(doa, n_b, element_spacing, wavelength).adjoint() * precoder;
    const Eigen::RowVectorXcd reference = r * symbols.data();
    const QuotientGrid z = delay_doppler_quotient(reference, y_grid, w_rf, doa,
                                                  element_spacing, wavelength, options.guard);
    out.push_back(to_estimate(find_likelihood_peak(z, options.refine), ofdm));
  }
  return out;
}

std::vector<DelayDopplerEstimate> estimate_delay_doppler(
    const OfdmGrid& x_grid, const OfdmGrid& y_grid, const AnalogBeamformer& w_rf,
    const std::vector<double>& doas, const OfdmParams& ofdm, double element_spacing,
    double wavelength, const DelayDopplerOptions& options) {
  check_grid(y_grid, ofdm);
  if (x_grid.cells() != y_grid.cells()) {
    throw InvalidArgument("estimate_delay_doppler: x and y grids differ in shape");
  }
  std::vector<DelayDopplerEstimate> out;
  out.reserve(doas.size());
  for (double doa : doas) {
    const CVector a_n = steering(doa, x_grid.space_dim(), element_spacing, wavelength);
    const Eigen::RowVectorXcd reference = a_n.adjoint() * x_grid.data();
    const QuotientGrid z = delay_doppler_quotient(reference, y_grid, w_rf, doa,
                                                  element_spacing, wavelength, options.guard);
    out.push_back(to_estimate(find_likelihood_peak(z, options.refine), ofdm));
  }
  return out;
}

SensingEstimate make_estimate(double doa, const DelayDopplerEstimate& dd, double wavelength) {
  SensingEstimate e;
  e.doa = doa;
  e.delay = dd.delay;
  e.doppler = dd.doppler;
  e.range = range_from_delay(dd.delay);
  e.velocity = velocity_from_doppler(dd.doppler, wavelength);
  return e;
}

Association associate_estimates(const std::vector<SensingEstimate>& estimates,
                                const std::vector<RadarTarget>& truth, double threshold) {
  struct Candidate {
    double dist;
    int truth;
    int estimate;
  };
  std::vector<Candidate> cands;
  for (int t = 0; t < static_cast<int>(truth.size()); ++t) {
    for (int e = 0; e < static_cast<int>(estimates.size()); ++e) {
      const double d = std::abs(estimates[e].doa - truth[t].doa);
      if (d <= threshold) cands.push_back({d, t, e});
    }
  }
  // Ties are broken on estimate content, not position, so reordering the
  // estimate list cannot change which values get paired.
  auto key = [&](const Candidate& c) {
    const auto& e = estimates[c.estimate];
    return std::make_tuple(c.dist, c.truth, e.doa, e.delay, e.doppler, c.estimate);
  };
  std::sort(cands.begin(), cands.end(),
            [&](const Candidate& x, const Candidate& y) { return key(x) < key(y); });

  std::vector<char> truth_used(truth.size(), 0);
  std::vector<char> est_used(estimates.size(), 0);
  Association out;
  for (const auto& c : cands) {
    if (truth_used[c.truth] || est_used[c.estimate]) continue;
    truth_used[c.truth] = est_used[c.estimate] = 1;
    const auto& e = estimates[c.estimate];
    const auto& t = truth[c.truth];
    MatchedPair p;
    p.estimate = c.estimate;
    p.truth = c.truth;
    p.doa_error = c.dist;
    p.range_error = std::abs(e.range - t.range);
    p.velocity_error = std::abs(e.velocity - t.velocity);
    if (t.velocity != 0.0) {
      p.relative_velocity_error = p.velocity_error / std::abs(t.velocity);
    } else {
      p.relative_velocity_error =
          p.velocity_error == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    out.pairs.push_back(p);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MatchedPair& x, const MatchedPair& y) { return x.truth < y.truth; });
  for (int t = 0; t < static_cast<int>(truth.size()); ++t) {
    if (!truth_used[t]) out.missed_truths.push_back(t);
  }
  for (int e = 0; e < static_cast<int>(estimates.size()); ++e) {
    if (!est_used[e]) out.unmatched_estimates.push_back(e);
  }
  return out;
}

}  // namespace fdisac
