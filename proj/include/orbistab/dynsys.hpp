#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "orbistab/types.hpp"

namespace orbistab {

struct ProjectionFrame;  // projection.hpp

/// Control-affine system xdot = f(x) + g(x) u.
///
/// Analytic Jacobians are optional; when absent, 5-point central finite
/// differences are used. A nominal input makes the orbit a solution of the
/// driven system instead of the free flow.
struct ControlAffineSystem {
  int n = 0;  ///< state dimension (>= 2)
  int m = 0;  ///< input dimension (>= 1)
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> g;
  std::function<Mat(const Vec&)> df;                  ///< optional
  std::vector<std::function<Mat(const Vec&)>> dg;     ///< optional, per column
  std::function<Vec(double)> nominal_input;           ///< optional, periodic
  std::function<Vec(double)> nominal_input_deriv;     ///< optional

  /// Jacobian of f, analytic when available else finite differences.
  Mat jacobian_f(const Vec& x) const;
  /// Jacobian of column i of g.
  Mat jacobian_g(int i, const Vec& x) const;
  /// Nominal input value, zero vector when absent.
  Vec upsilon(double s) const;
  Vec upsilon_prime(double s, double period) const;
  bool has_nominal_input() const { return static_cast<bool>(nominal_input); }
};

/// Regular periodic parameterization s -> x_s(s) of a closed orbit.
struct OrbitParameterization {
  double s0 = 0.0;
  double s_T = 0.0;  ///< parameter period (> 0)
  std::function<Vec(double)> xs;
  std::function<Vec(double)> dxs;   ///< optional tangent
  std::function<Vec(double)> d2xs;  ///< optional curvature

  double wrap(double s) const { return wrap_parameter(s, s0, s_T); }
};

/// Tangent x_s'(s); analytic when available else 5-point differences with
/// step s_T * 1e-4. Throws DegenerateTangent when the norm falls below 1e-12.
Vec orbit_tangent(const OrbitParameterization& orbit, double s);

/// Curvature x_s''(s), analytic or finite differences of the tangent.
Vec orbit_curvature(const OrbitParameterization& orbit, double s);

struct OrbitResidualReport {
  double max_residual = 0.0;
  double argmax_s = 0.0;
  std::vector<double> s_values;
  std::vector<double> residuals;
  bool certified(double tol = 1e-8) const { return max_residual < tol; }
};

/// Max over a grid of || Omega(s) (f(x_s) + g(x_s) upsilon(s)) ||: the
/// transverse part of the flow along the supplied curve. Small residual
/// certifies the curve is an orbit of the (possibly driven) system.
OrbitResidualReport verify_orbit(const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size);

/// First-approximation drift A(s) along the orbit: Df + sum dg_i upsilon_i,
/// plus g upsilon'(s) Gamma(s) when include_upsilon_prime is set.
Mat a_matrix(const ControlAffineSystem& system,
             const OrbitParameterization& orbit, const ProjectionFrame& frame,
             double s, bool include_upsilon_prime = false);

}  // namespace orbistab
