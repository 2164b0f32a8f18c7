#pragma once

#include <optional>

#include "orbistab/dynsys.hpp"
#include "orbistab/types.hpp"

namespace orbistab {

/// Geometric frame of the orthogonal projection at one parameter value.
struct ProjectionFrame {
  double s = 0.0;
  Vec x_on_orbit;  ///< x_s(s)
  Vec tangent;     ///< x_s'(s)
  Vec curvature;   ///< x_s''(s)
  RowVec gamma;    ///< Gamma(s), Jacobian row of p on the orbit
  Mat omega;       ///< Omega(s) = I - x_s' Gamma
  double rho = 0.0;    ///< Gamma(s) f(x_s(s)), parameter speed
  double theta = 0.0;  ///< obliqueness angle; 0 for the orthogonal p
};

/// Solve the orthogonality condition x_s'(s)^T (x - x_s(s)) = 0 for s.
///
/// With a hint, Newton is seeded there and wins even if a remote grid
/// minimum is closer (continuity tie-breaking during simulation). Without
/// one, a 256-point scan picks the seed and ProjectionAmbiguous is raised
/// when two separated grid minima are within 1% of each other.
double project(const OrbitParameterization& orbit, const Vec& x,
               std::optional<double> hint = std::nullopt);

/// Jacobian row of the orthogonal projection at x (projected to s):
/// x_s'^T / (||x_s'||^2 - x_s''^T (x - x_s)). Throws FocalPointReached when
/// the denominator degenerates.
RowVec gamma_at(const OrbitParameterization& orbit, const Vec& x, double s);

/// Assemble the full frame at x_s(s).
ProjectionFrame frame_at(const ControlAffineSystem& system,
                         const OrbitParameterization& orbit, double s);

/// (s, z_perp) with z_perp = x - x_s(p(x)).
std::pair<double, Vec> transverse_coords(const ControlAffineSystem& system,
                                         const OrbitParameterization& orbit,
                                         const Vec& x,
                                         std::optional<double> hint =
                                             std::nullopt);

}  // namespace orbistab
