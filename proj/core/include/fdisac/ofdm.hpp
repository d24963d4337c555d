// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdisac/units.hpp"

namespace fdisac {

/// 5G NR FR2 numerology (mu = 3): 66 PRBs, 120 kHz spacing.
struct OfdmParams {
  int subcarriers = 792;  // P
  int symbols = 14;       // Q
  double subcarrier_spacing = 120e3;
  double cp_duration = 8.92e-6 - 1.0 / 120e3;  // so that T_s = 8.92 us

  /// T_s = 1/df + T_cp.
  double symbol_duration() const { return 1.0 / subcarrier_spacing + cp_duration; }
  /// Delay resolution of the likelihood search, 1/(P df).
  double delay_bin() const { return 1.0 / (subcarriers * subcarrier_spacing); }
  /// Doppler resolution of the likelihood search, 1/(Q T_s).
  double doppler_bin() const { return 1.0 / (symbols * symbol_duration()); }
  /// Range resolution c/(2 P df) under the monostatic two-way convention.
  double range_bin() const { return kSpeedOfLight * delay_bin() / 2.0; }

  void validate() const;
};

/// Frequency-domain resource grid. Storage is one column per resource
/// element, column index q*P + p, one row per space index (stream, antenna
/// or RF chain). Dimensions are fixed at construction.
class OfdmGrid {
 public:
  OfdmGrid(int subcarriers, int symbols, int space_dim);
  OfdmGrid(int subcarriers, int symbols, CMatrix data);

  int subcarriers() const { return subcarriers_; }
  int symbols() const { return symbols_; }
  int space_dim() const { return static_cast<int>(data_.rows()); }
  Eigen::Index cells() const { return data_.cols(); }

  static Eigen::Index cell_index(int p, int q, int subcarriers) {
    return static_cast<Eigen::Index>(q) * subcarriers + p;
  }
  Eigen::Index cell_index(int p, int q) const { return cell_index(p, q, subcarriers_); }

  auto cell(int p, int q) { return data_.col(cell_index(p, q)); }
  auto cell(int p, int q) const { return data_.col(cell_index(p, q)); }

  Complex& operator()(int p, int q, int s) { return data_(s, cell_index(p, q)); }
  Complex operator()(int p, int q, int s) const { return data_(s, cell_index(p, q)); }

  const CMatrix& data() const { return data_; }
  /// Mutable view with fixed shape; resizing through it is not allowed.
  Eigen::Ref<CMatrix> values() { return data_; }

  bool same_shape(const OfdmGrid& other) const {
    return subcarriers_ == other.subcarriers_ && symbols_ == other.symbols_ &&
           space_dim() == other.space_dim();
  }

  /// Mean of |entry|^2 summed over the space index, i.e. average power per cell.
  double mean_cell_power() const;

 private:
  int subcarriers_;
  int symbols_;
  CMatrix data_;
};

}  // namespace fdisac
