#include "orbistab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "orbistab/errors.hpp"

namespace orbistab {

namespace {

constexpr int kScanPoints = 256;
constexpr int kNewtonMax = 50;

// Orthogonality residual F(s) = x_s'(s)^T (x - x_s(s)) and its s-derivative.
double ortho_residual(const OrbitParameterization& orbit, const Vec& x,
                      double s) {
  return orbit_tangent(orbit, s).dot(x - orbit.xs(s));
}

double ortho_residual_prime(const OrbitParameterization& orbit, const Vec& x,
                            double s) {
  const Vec t = orbit_tangent(orbit, s);
  return orbit_curvature(orbit, s).dot(x - orbit.xs(s)) - t.squaredNorm();
}

double newton_refine(const OrbitParameterization& orbit, const Vec& x,
                     double seed) {
  const double tol = 1e-10 * (1.0 + x.norm());
  double s = seed;
  for (int it = 0; it < kNewtonMax; ++it) {
    const double F = ortho_residual(orbit, x, s);
    if (std::abs(F) < tol) return s;
    const double dF = ortho_residual_prime(orbit, x, s);
    if (std::abs(dF) < 1e-14)
      throw NewtonDiverged("projection Newton hit a flat residual");
    s -= F / dF;
  }
  throw NewtonDiverged("projection Newton did not converge in 50 iterations");
}

}  // namespace

double project(const OrbitParameterization& orbit, const Vec& x,
               std::optional<double> hint) {
  if (hint) {
    return orbit.wrap(newton_refine(orbit, x, *hint));
  }

  // Coarse scan of the squared distance, then Newton from the best sample.
  std::vector<double> d2(kScanPoints);
  for (int i = 0; i < kScanPoints; ++i) {
    const double s = orbit.s0 + orbit.s_T * i / kScanPoints;
    d2[static_cast<size_t>(i)] = (x - orbit.xs(s)).squaredNorm();
  }
  int best = 0;
  for (int i = 1; i < kScanPoints; ++i)
    if (d2[static_cast<size_t>(i)] < d2[static_cast<size_t>(best)]) best = i;

  // Ambiguity: a separated local minimum within 1% of the global one.
  const double dbest = std::sqrt(d2[static_cast<size_t>(best)]);
  for (int i = 0; i < kScanPoints; ++i) {
    const int prev = (i + kScanPoints - 1) % kScanPoints;
    const int next = (i + 1) % kScanPoints;
    const bool local_min = d2[static_cast<size_t>(i)] <= d2[static_cast<size_t>(prev)] &&
                           d2[static_cast<size_t>(i)] <= d2[static_cast<size_t>(next)];
    if (!local_min) continue;
    const int sep = std::min(std::abs(i - best), kScanPoints - std::abs(i - best));
    if (sep <= 2) continue;
    const double di = std::sqrt(d2[static_cast<size_t>(i)]);
    if (di <= 1.01 * dbest + 1e-15)
      throw ProjectionAmbiguous("two projection candidates within 1% and no hint");
  }

  const double seed = orbit.s0 + orbit.s_T * best / kScanPoints;
  return orbit.wrap(newton_refine(orbit, x, seed));
}

RowVec gamma_at(const OrbitParameterization& orbit, const Vec& x, double s) {
  const Vec t = orbit_tangent(orbit, s);
  const Vec c = orbit_curvature(orbit, s);
  const double denom = t.squaredNorm() - c.dot(x - orbit.xs(s));
  if (std::abs(denom) < 1e-9 * t.squaredNorm())
    throw FocalPointReached("projection Jacobian denominator degenerate at s=" +
                            std::to_string(s));
  return t.transpose() / denom;
}

ProjectionFrame frame_at(const ControlAffineSystem& system,
                         const OrbitParameterization& orbit, double s) {
  ProjectionFrame fr;
  fr.s = s;
  fr.x_on_orbit = orbit.xs(s);
  fr.tangent = orbit_tangent(orbit, s);
  fr.curvature = orbit_curvature(orbit, s);
  fr.gamma = fr.tangent.transpose() / fr.tangent.squaredNorm();
  fr.omega = Mat::Identity(system.n, system.n) - fr.tangent * fr.gamma;
  Vec flow = system.f(fr.x_on_orbit);
  if (system.has_nominal_input())
    flow += system.g(fr.x_on_orbit) * system.upsilon(s);
  fr.rho = fr.gamma.dot(flow);
  const double ct = 1.0 / (fr.gamma.norm() * fr.tangent.norm());
  fr.theta = std::acos(std::clamp(ct, -1.0, 1.0));
  return fr;
}

std::pair<double, Vec> transverse_coords(const ControlAffineSystem& system,
                                         const OrbitParameterization& orbit,
                                         const Vec& x,
                                         std::optional<double> hint) {
  (void)system;
  const double s = project(orbit, x, hint);
  return {s, x - orbit.xs(s)};
}

}  // namespace orbistab
