// SPDX-License-Identifier: Apache-2.0
#include "fdisac/units.hpp"

#include <cmath>
#include <limits>

namespace fdisac {

double dbm_to_watts(double dbm) {
  if (std::isinf(dbm) && dbm < 0) return 0.0;
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double watts_to_dbm(double watts) {
  if (watts <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(watts) + 30.0;
}

double db_to_linear(double db) {
  if (std::isinf(db) && db < 0) return 0.0;
  return std::pow(10.0, db / 10.0);
}

double linear_to_db(double value) {
  if (value <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(value);
}

}  // namespace fdisac
