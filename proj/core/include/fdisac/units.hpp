// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace fdisac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

/// dBm -> W. -inf maps to exactly 0.
double dbm_to_watts(double dbm);
/// W -> dBm. 0 maps to -inf.
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double value);

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

}  // namespace fdisac
