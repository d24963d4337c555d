#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "fdisac/units.hpp"

namespace fdisac::testing {

inline CMatrix random_cmatrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                              double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

// e^{j 2pi d sin(theta) m / lambda} / sqrt(n), written out longhand.
inline Complex ula_element(double theta, int m, int n, double d_over_lambda) {
  const double ph = 2.0 * kPi * d_over_lambda * std::sin(theta) * m;
  return Complex(std::cos(ph), std::sin(ph)) / std::sqrt(static_cast<double>(n));
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace fdisac::testing
