// SPDX-License-Identifier: Apache-2.0
//
// Delay/Doppler likelihood over the per-cell quotient z_{p,q}:
//
//   A(n, m) = sum_p ( sum_q z_{p,q} e^{-j 2pi q m / Q} ) e^{+j 2pi p n / P}
//
// with n in [0, P) and m in [-Q/2, Q/2).
#pragma once

#include "fdisac/units.hpp"

namespace fdisac {

/// z stored P x Q (row = subcarrier, column = symbol).
using QuotientGrid = CMatrix;

/// Full likelihood map, P rows (n = 0..P-1) by Q columns where column c holds
/// Doppler index m = c - Q/2. Evaluated with a 2-D FFT.
CMatrix likelihood_map(const QuotientGrid& z);

/// A(nu, mu) for continuous delay index nu and Doppler index mu (direct sum).
Complex likelihood_at(const QuotientGrid& z, double nu, double mu);

struct LikelihoodPeak {
  int delay_bin = 0;    // n*
  int doppler_bin = 0;  // m*, in [-Q/2, Q/2)
  double delay_index = 0.0;    // refined nu (equals n* without refinement)
  double doppler_index = 0.0;  // refined mu
  double power = 0.0;          // |A|^2 at the reported point
};

/// Arg-max of |A(n, m)|^2 on the grid; ties resolve to the lowest n, then lowest m.
/// With `refine`, the peak is then polished by maximising |A(nu, mu)|^2 within
/// one bin of the grid maximum (alternating golden-section searches).
LikelihoodPeak find_likelihood_peak(const QuotientGrid& z, bool refine);

}  // namespace fdisac
