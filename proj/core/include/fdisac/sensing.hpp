// SPDX-License-Identifier: Apache-2.0
//
// Radar parameter estimation from the combined M_b^RF-chain receive grid:
// sample covariance, MUSIC under hybrid combining and the delay/Doppler
// likelihood search.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fdisac/array.hpp"
#include "fdisac/channels.hpp"
#include "fdisac/likelihood.hpp"
#include "fdisac/ofdm.hpp"

namespace fdisac {

/// R = (1/PQ) sum y y^H over every cell.
CMatrix sample_covariance(const OfdmGrid& y_grid);

/// Eigenpairs of a Hermitian matrix with eigenvalues in descending order.
struct EigenDecomposition {
  RVector values;
  CMatrix vectors;  // column i pairs with values[i]
};

/// Throws InvalidArgument when `cov` is not Hermitian to 1e-10 relative.
EigenDecomposition hermitian_eigen_descending(const CMatrix& cov);

struct MusicPeak {
  double angle = 0.0;  // radians, refined
  double value = 0.0;  // spectrum value at the grid maximum
  int grid_index = 0;
};

struct MusicSpectrum {
  std::vector<double> grid_angles;
  std::vector<double> values;
  std::vector<MusicPeak> peaks;  // descending by value, at most K
};

struct MusicOptions {
  double grid_step = deg_to_rad(0.1);
  double min_angle = -kPi / 2.0;
  double max_angle = kPi / 2.0;
  bool refine = true;  // 3-point parabola on the dB spectrum
  /// Divide by ||W^H a||^2 so the pseudo-spectrum is measured on the
  /// combined manifold rather than the raw antenna steering vector. Without
  /// it, directions the analog beams barely see (||W^H a|| ~ 0) turn into
  /// spurious peaks.
  bool normalize = true;
};

/// S(theta) = 1 / (a^H W U_n U_n^H W^H a) with U_n the M_RF - K weakest
/// eigenvectors. Returns the K largest local maxima.
MusicSpectrum music_spectrum(const CMatrix& cov, const AnalogBeamformer& w_rf, int k_targets,
                             double element_spacing, double wavelength,
                             const MusicOptions& options = {});

void write_spectrum_csv(std::ostream& out, const MusicSpectrum& spectrum);

struct DelayDopplerEstimate {
  double delay = 0.0;    // seconds
  double doppler = 0.0;  // Hz
  LikelihoodPeak peak;
};

struct DelayDopplerOptions {
  bool refine = true;
  /// Cells whose reference magnitude is below this fraction of the largest
  /// one are left out of the quotient.
  double guard = 1e-9;
};

/// Per-DoA likelihood search. `symbols` and `precoder` (N_b x d_b) describe
/// the transmitted grid x = precoder * s without materialising it.
std::vector<DelayDopplerEstimate> estimate_delay_doppler(
    const OfdmGrid& symbols, const CMatrix& precoder, const OfdmGrid& y_grid,
    const AnalogBeamformer& w_rf, const std::vector<double>& doas, const OfdmParams& ofdm,
    double element_spacing, double wavelength, const DelayDopplerOptions& options = {});

/// Same estimate from an explicit antenna-domain transmit grid.
std::vector<DelayDopplerEstimate> estimate_delay_doppler(
    const OfdmGrid& x_grid, const OfdmGrid& y_grid, const AnalogBeamformer& w_rf,
    const std::vector<double>& doas, const OfdmParams& ofdm, double element_spacing,
    double wavelength, const DelayDopplerOptions& options = {});

/// Quotient z_{p,q} for one DoA given c_{p,q} = a_N^H(theta) x_{p,q} per cell.
QuotientGrid delay_doppler_quotient(const Eigen::RowVectorXcd& reference,
                                    const OfdmGrid& y_grid, const AnalogBeamformer& w_rf,
                                    double doa, double element_spacing, double wavelength,
                                    double guard);

struct SensingEstimate {
  double doa = 0.0;
  double delay = 0.0;
  double doppler = 0.0;
  double range = 0.0;
  double velocity = 0.0;
};

SensingEstimate make_estimate(double doa, const DelayDopplerEstimate& dd, double wavelength);

struct MatchedPair {
  int estimate = -1;
  int truth = -1;
  double doa_error = 0.0;       // radians, absolute
  double range_error = 0.0;     // meters, absolute
  double velocity_error = 0.0;  // m/s, absolute
  double relative_velocity_error = 0.0;
};

struct Association {
  std::vector<MatchedPair> pairs;  // ordered by truth index
  std::vector<int> unmatched_estimates;
  std::vector<int> missed_truths;
};

/// Greedy nearest-DoA matching without replacement; pairs farther apart than
/// `threshold` are never formed.
Association associate_estimates(const std::vector<SensingEstimate>& estimates,
                                const std::vector<RadarTarget>& truth,
                                double threshold = deg_to_rad(3.0));

}  // namespace fdisac
