// SPDX-License-Identifier: Apache-2.0
#include "fdisac/ofdm.hpp"

#include "fdisac/errors.hpp"

namespace fdisac {

void OfdmParams::validate() const {
  if (subcarriers < 1 || symbols < 1) {
    throw InvalidArgument("OfdmParams: subcarriers and symbols must be >= 1");
  }
  if (!(subcarrier_spacing > 0.0) || cp_duration < 0.0) {
    throw InvalidArgument("OfdmParams: spacing must be positive and cp non-negative");
  }
}

OfdmGrid::OfdmGrid(int subcarriers, int symbols, int space_dim)
    : subcarriers_(subcarriers), symbols_(symbols) {
  if (subcarriers < 1 || symbols < 1 || space_dim < 1) {
    throw InvalidArgument("OfdmGrid: dimensions must be >= 1");
  }
  data_ = CMatrix::Zero(space_dim, static_cast<Eigen::Index>(subcarriers) * symbols);
}

OfdmGrid::OfdmGrid(int subcarriers, int symbols, CMatrix data)
    : subcarriers_(subcarriers), symbols_(symbols), data_(std::move(data)) {
  if (subcarriers < 1 || symbols < 1 || data_.rows() < 1) {
    throw InvalidArgument("OfdmGrid: dimensions must be >= 1");
  }
  if (data_.cols() != static_cast<Eigen::Index>(subcarriers) * symbols) {
    throw InvalidArgument("OfdmGrid: data has wrong number of cells");
  }
}

double OfdmGrid::mean_cell_power() const {
  return data_.squaredNorm() / static_cast<double>(data_.cols());
}

}  // namespace fdisac
