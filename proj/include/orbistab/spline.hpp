#pragma once

#include <vector>

#include "orbistab/types.hpp"

namespace orbistab {

/// Periodic cubic spline over several channels sharing one grid.
///
/// The grid holds N+1 strictly increasing knots with the last one closing
/// the period; sample row N must equal row 0. Interpolation reproduces the
/// samples exactly at the knots.
class PeriodicSplineSet {
 public:
  PeriodicSplineSet() = default;
  /// values: (N+1) x M, one row per knot, one column per channel.
  PeriodicSplineSet(Vec s_grid, Mat values);

  /// Interpolated channel values at s (wrapped into the period).
  RowVec eval(double s) const;
  /// Interpolated first derivative d/ds.
  RowVec eval_derivative(double s) const;

  int channels() const { return static_cast<int>(values_.cols()); }
  const Vec& grid() const { return s_grid_; }

 private:
  int locate(double& s) const;
  Vec s_grid_;
  Mat values_;   // (N+1) x M
  Mat second_;   // (N+1) x M second derivatives at knots
};

/// Spectral (trigonometric) first derivative of uniformly sampled periodic
/// data. `samples` holds N points covering one period without the duplicated
/// endpoint.
Vec spectral_derivative(const Vec& samples, double period);

/// Trapezoid rule over one period for uniformly sampled periodic data
/// (spectrally accurate for smooth integrands). `samples` has N+1 entries
/// with the endpoint duplicated.
double periodic_trapezoid(const Vec& s_grid, const Vec& samples);

}  // namespace orbistab
