// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "fdisac/units.hpp"

namespace fdisac {

using Rng = std::mt19937_64;

/// Mixes a parent seed with stream identifiers into an independent child
/// seed (splitmix64 finaliser). Used so every stochastic stage of a run has
/// its own generator and results never depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> stream);

/// Stable 64-bit tag for a stream name (FNV-1a).
std::uint64_t stream_tag(std::string_view name);

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
class ComplexGaussian {
 public:
  explicit ComplexGaussian(double variance)
      : dist_(0.0, std::sqrt(variance / 2.0)) {}
  Complex operator()(Rng& rng) {
    const double re = dist_(rng);
    const double im = dist_(rng);
    return {re, im};
  }

 private:
  std::normal_distribution<double> dist_;
};

/// Fills an rows x cols matrix with i.i.d. CN(0, variance) entries, column-major order.
CMatrix complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double variance,
                                Rng& rng);

}  // namespace fdisac
