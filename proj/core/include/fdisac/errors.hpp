// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fdisac {

// Error kinds raised by the library. All derive from a std exception so
// callers that only care about "something failed" can catch those.

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A transmit or optimizer output violates a power or residual constraint.
struct ConstraintViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A matrix that must be invertible (e.g. W_u^H W_u) is singular.
struct RankDeficiency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Interference-plus-noise term of an SNR is zero.
struct DegenerateNoise : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// MUSIC was asked for as many sources as the covariance has dimensions.
struct SubspaceExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every reference-signal entry fell under the quotient guard.
struct DegenerateReference : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fdisac
