#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace orbistab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

/// Reduce s into [s0, s0 + period).
inline double wrap_parameter(double s, double s0, double period) {
  double r = std::fmod(s - s0, period);
  if (r < 0.0) r += period;
  return s0 + r;
}

}  // namespace orbistab
