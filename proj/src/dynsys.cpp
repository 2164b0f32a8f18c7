#include "orbistab/dynsys.hpp"

#include <cmath>

#include "orbistab/errors.hpp"
#include "orbistab/finite_diff.hpp"
#include "orbistab/projection.hpp"

namespace orbistab {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                double step) {
  const double h = step > 0.0 ? step : fd_state_step(x);
  const int n = static_cast<int>(x.size());
  Vec probe = f(x);
  Mat J(probe.size(), n);
  for (int j = 0; j < n; ++j) {
    auto along = [&](double t) {
      Vec xt = x;
      xt[j] += t;
      return f(xt);
    };
    J.col(j) = fd_derivative5(along, 0.0, h);
  }
  if (!J.allFinite())
    throw MissingJacobian("finite-difference Jacobian produced non-finite values");
  return J;
}

Mat ControlAffineSystem::jacobian_f(const Vec& x) const {
  if (df) {
    Mat J = df(x);
    if (!J.allFinite()) throw MissingJacobian("analytic df returned non-finite values");
    return J;
  }
  return fd_jacobian(f, x);
}

Mat ControlAffineSystem::jacobian_g(int i, const Vec& x) const {
  if (!dg.empty() && dg[static_cast<size_t>(i)]) {
    return dg[static_cast<size_t>(i)](x);
  }
  auto column = [this, i](const Vec& xv) { return Vec(g(xv).col(i)); };
  return fd_jacobian(column, x);
}

Vec ControlAffineSystem::upsilon(double s) const {
  if (nominal_input) return nominal_input(s);
  return Vec::Zero(m);
}

Vec ControlAffineSystem::upsilon_prime(double s, double period) const {
  if (nominal_input_deriv) return nominal_input_deriv(s);
  if (!nominal_input) return Vec::Zero(m);
  return fd_derivative5(nominal_input, s, period * 1e-4);
}

Vec orbit_tangent(const OrbitParameterization& orbit, double s) {
  Vec t = orbit.dxs ? orbit.dxs(s)
                    : fd_derivative5(orbit.xs, s, orbit.s_T * 1e-4);
  if (t.norm() < 1e-12)
    throw DegenerateTangent("orbit tangent norm below 1e-12 at s=" +
                            std::to_string(s));
  return t;
}

Vec orbit_curvature(const OrbitParameterization& orbit, double s) {
  if (orbit.d2xs) return orbit.d2xs(s);
  auto tangent = [&](double v) { return orbit_tangent(orbit, v); };
  return fd_derivative5(tangent, s, orbit.s_T * 1e-4);
}

OrbitResidualReport verify_orbit(const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size) {
  OrbitResidualReport report;
  report.argmax_s = orbit.s0;
  for (int i = 0; i < grid_size; ++i) {
    const double s = orbit.s0 + orbit.s_T * i / grid_size;
    ProjectionFrame frame = frame_at(system, orbit, s);
    Vec flow = system.f(frame.x_on_orbit);
    if (system.has_nominal_input())
      flow += system.g(frame.x_on_orbit) * system.upsilon(s);
    const double r = (frame.omega * flow).norm();
    report.s_values.push_back(s);
    report.residuals.push_back(r);
    if (r > report.max_residual) {
      report.max_residual = r;
      report.argmax_s = s;
    }
  }
  return report;
}

Mat a_matrix(const ControlAffineSystem& system,
             const OrbitParameterization& orbit, const ProjectionFrame& frame,
             double s, bool include_upsilon_prime) {
  Mat A = system.jacobian_f(frame.x_on_orbit);
  if (system.has_nominal_input()) {
    const Vec ups = system.upsilon(s);
    for (int i = 0; i < system.m; ++i)
      A += system.jacobian_g(i, frame.x_on_orbit) * ups[i];
    if (include_upsilon_prime) {
      const Vec dups = system.upsilon_prime(s, orbit.s_T);
      A += system.g(frame.x_on_orbit) * dups * frame.gamma;
    }
  }
  if (!A.allFinite()) throw MissingJacobian("A(s) contains non-finite values");
  return A;
}

}  // namespace orbistab
