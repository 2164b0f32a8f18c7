#include "orbistab/transverse.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "orbistab/errors.hpp"
#include "orbistab/finite_diff.hpp"

namespace orbistab {

namespace {

Vec closed_grid(const OrbitParameterization& orbit, int grid_size) {
  Vec g(grid_size + 1);
  for (int i = 0; i <= grid_size; ++i)
    g[i] = orbit.s0 + orbit.s_T * i / grid_size;
  return g;
}

int matrix_rank(const Mat& M, double tol_scale) {
  Eigen::JacobiSVD<Mat> svd(M);
  const double tol = tol_scale * svd.singularValues()[0];
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

// Partial derivative dy/dx of the map at (s, x), callback or 5-point FD.
Mat map_dy_dx(const TransverseCoordinateMap& map, double s, const Vec& x) {
  if (map.dy_dx) return map.dy_dx(s, x);
  auto f = [&](const Vec& xv) { return map.y(s, xv); };
  return fd_jacobian(f, x);
}

Vec map_dy_ds(const TransverseCoordinateMap& map, const OrbitParameterization& orbit,
              double s, const Vec& x) {
  if (map.dy_ds) return map.dy_ds(s, x);
  auto f = [&](double sv) { return map.y(sv, x); };
  return fd_derivative5(f, s, orbit.s_T * 1e-4);
}

// Hessian of the projection operator on the orbit, by central differences of
// its Jacobian row. Defaults to the orthogonal projection.
Mat projection_hessian(const TransverseCoordinateMap& map,
                       const OrbitParameterization& orbit,
                       const ProjectionFrame& frame) {
  std::function<RowVec(const Vec&)> dp = map.dp;
  if (!dp) {
    dp = [&orbit](const Vec& x) {
      const double s = project(orbit, x);
      return gamma_at(orbit, x, s);
    };
  }
  const Vec& x0 = frame.x_on_orbit;
  const double h = fd_state_step(x0);
  const int n = static_cast<int>(x0.size());
  Mat H(n, n);
  for (int j = 0; j < n; ++j) {
    auto along = [&](double t) {
      Vec xt = x0;
      xt[j] += t;
      return Vec(dp(xt).transpose());
    };
    H.col(j) = fd_derivative5(along, 0.0, h);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace

Mat a_perp_orthogonal(const ControlAffineSystem& system,
                      const OrbitParameterization& orbit,
                      const ProjectionFrame& frame, double s) {
  const Mat A = a_matrix(system, orbit, frame, s);
  const Vec& t = frame.tangent;
  return frame.omega * A - (t * t.transpose() / t.squaredNorm()) * A.transpose();
}

Mat b_perp(const ControlAffineSystem& system,
           const OrbitParameterization& orbit, const ProjectionFrame& frame,
           double s) {
  (void)orbit;
  (void)s;
  return frame.omega * system.g(frame.x_on_orbit);
}

PeriodicLinearSystem tvl_orthogonal(const ControlAffineSystem& system,
                                    const OrbitParameterization& orbit,
                                    int grid_size) {
  const Vec grid = closed_grid(orbit, grid_size);
  std::vector<Mat> As, Bs, Cs, Oms;
  Vec rho(grid.size());
  for (long i = 0; i < grid.size(); ++i) {
    const ProjectionFrame fr = frame_at(system, orbit, grid[i]);
    As.push_back(a_perp_orthogonal(system, orbit, fr, grid[i]));
    Bs.push_back(b_perp(system, orbit, fr, grid[i]));
    Cs.push_back(Mat(fr.gamma));
    Oms.push_back(fr.omega);
    rho[i] = fr.rho;
  }
  return PeriodicLinearSystem(grid, std::move(As), std::move(Bs), std::move(rho),
                              orbit.s_T, std::move(Cs), std::move(Oms));
}

PeriodicLinearSystem comparison_system(const ControlAffineSystem& system,
                                       const OrbitParameterization& orbit,
                                       int grid_size) {
  const Vec grid = closed_grid(orbit, grid_size);
  std::vector<Mat> As, Bs, Oms;
  Vec rho(grid.size());
  for (long i = 0; i < grid.size(); ++i) {
    const ProjectionFrame fr = frame_at(system, orbit, grid[i]);
    const Mat A = a_matrix(system, orbit, fr, grid[i]);
    As.push_back(fr.omega * A);
    Bs.push_back(fr.omega * system.g(fr.x_on_orbit));
    Oms.push_back(fr.omega);
    rho[i] = fr.rho;
  }
  return PeriodicLinearSystem(grid, std::move(As), std::move(Bs), std::move(rho),
                              orbit.s_T, {}, std::move(Oms));
}

Mat pi_dagger(const Mat& Pi, const ProjectionFrame& frame) {
  const int N = static_cast<int>(Pi.rows());
  const int n = static_cast<int>(Pi.cols());
  if (matrix_rank(Pi, 1e-9) < std::min(N, n))
    throw RankDeficient("Pi(s) is rank deficient");
  if (N == n - 1) {
    const Mat Psi = Pi * frame.omega;
    const Mat G = Psi * Psi.transpose();
    if (matrix_rank(G, 1e-12) < N)
      throw RankDeficient("Psi Psi^T singular in pi_dagger");
    return frame.omega * Psi.transpose() * G.inverse();
  }
  if (N == n) {
    return Pi.inverse();
  }
  return (Pi.transpose() * Pi).inverse() * Pi.transpose();
}

TransverseValidationReport validate_transverse_coords(
    const TransverseCoordinateMap& map, const ControlAffineSystem& system,
    const OrbitParameterization& orbit, int grid_size) {
  TransverseValidationReport rep;
  const int n = system.n;
  if (map.N < n - 1) {
    rep.pass = false;
    rep.rank_total_ok = false;
    return rep;
  }
  for (int i = 0; i < grid_size; ++i) {
    const double s = orbit.s0 + orbit.s_T * i / grid_size;
    const Vec xs = orbit.xs(s);
    const double vr = map.y(s, xs).norm();
    rep.s_values.push_back(s);
    rep.vanish_residuals.push_back(vr);
    rep.max_vanish_residual = std::max(rep.max_vanish_residual, vr);

    const ProjectionFrame fr = frame_at(system, orbit, s);
    const Mat Pi = map_dy_dx(map, s, xs);
    const Mat total = Pi + map_dy_ds(map, orbit, s, xs) * fr.gamma;
    if (matrix_rank(Pi, 1e-7) != std::min(map.N, n)) rep.rank_dy_dx_ok = false;
    if (matrix_rank(total, 1e-7) != n - 1) rep.rank_total_ok = false;
  }
  rep.pass = rep.max_vanish_residual < 1e-10 && rep.rank_dy_dx_ok &&
             rep.rank_total_ok;
  return rep;
}

PeriodicLinearSystem tvl_general(const TransverseCoordinateMap& map,
                                 const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size) {
  const Vec grid = closed_grid(orbit, grid_size);
  std::vector<Mat> As, Bs, Cs;
  Vec rho(grid.size());
  for (long i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const ProjectionFrame fr = frame_at(system, orbit, s);
    const Mat A = a_matrix(system, orbit, fr, s);
    const Mat Pi = map_dy_dx(map, s, fr.x_on_orbit);
    const Mat Pid = pi_dagger(Pi, fr);

    const Mat D2p = projection_hessian(map, orbit, fr);
    const Mat A_perp = fr.omega * A -
                       fr.tangent * fr.tangent.transpose() * D2p * fr.rho;

    // Xi(s): state Jacobian of Pi(s, x) x_s'(s) + dy/ds(s, x) on the orbit.
    auto mixed = [&](const Vec& xv) {
      return Vec(map_dy_dx(map, s, xv) * fr.tangent +
                 map_dy_ds(map, orbit, s, xv));
    };
    const Mat Xi = fr.rho * fd_jacobian(mixed, fr.x_on_orbit);

    As.push_back((Pi * A_perp + Xi) * Pid);
    Bs.push_back(Pi * fr.omega * system.g(fr.x_on_orbit));
    Cs.push_back(Mat(fr.gamma * Pid));
    rho[i] = fr.rho;
  }
  // Stitch the duplicated endpoint exactly to keep the splines periodic.
  As.back() = As.front();
  Bs.back() = Bs.front();
  Cs.back() = Cs.front();
  rho[grid.size() - 1] = rho[0];
  return PeriodicLinearSystem(grid, std::move(As), std::move(Bs), std::move(rho),
                              orbit.s_T, std::move(Cs));
}

PeriodicLinearSystem minimal_tvl(const TransverseCoordinateMap& map,
                                 const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size) {
  if (map.N != system.n - 1)
    throw RankDeficient("minimal_tvl requires N = n - 1 coordinates");
  const Vec grid = closed_grid(orbit, grid_size);
  std::vector<Mat> As, Bs;
  Vec rho(grid.size());
  for (long i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const ProjectionFrame fr = frame_at(system, orbit, s);
    const Mat Psi = map_dy_dx(map, s, fr.x_on_orbit);
    // Moore-Penrose pseudo-inverse via SVD.
    Eigen::JacobiSVD<Mat> svd(Psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues().minCoeff() <
        1e-9 * svd.singularValues().maxCoeff())
      throw RankDeficient("Psi rank deficient in minimal_tvl");
    const Mat Psi_pinv = svd.matrixV() *
                         svd.singularValues().cwiseInverse().asDiagonal() *
                         svd.matrixU().transpose();
    auto f_perp = [&](const Vec& xv) {
      return Vec(map_dy_dx(map, s, xv) * system.f(xv));
    };
    const Mat Df_perp = fd_jacobian(f_perp, fr.x_on_orbit);
    As.push_back(Df_perp * Psi_pinv);
    Bs.push_back(Psi * system.g(fr.x_on_orbit));
    rho[i] = fr.rho;
  }
  As.back() = As.front();
  Bs.back() = Bs.front();
  rho[grid.size() - 1] = rho[0];
  return PeriodicLinearSystem(grid, std::move(As), std::move(Bs), std::move(rho),
                              orbit.s_T);
}

PhaseVariationSystem phase_variation_system(const ControlAffineSystem& system,
                                            const OrbitParameterization& orbit,
                                            const TransverseCoordinateMap& map,
                                            int grid_size) {
  PhaseVariationSystem out;
  out.s_grid = closed_grid(orbit, grid_size);
  out.period = orbit.s_T;
  for (long i = 0; i < out.s_grid.size(); ++i) {
    const double s = out.s_grid[i];
    const ProjectionFrame fr = frame_at(system, orbit, s);
    const Mat A = a_matrix(system, orbit, fr, s);
    const Mat Pi = map_dy_dx(map, s, fr.x_on_orbit);
    const Mat Pid = pi_dagger(Pi, fr);
    const Mat D2p = projection_hessian(map, orbit, fr);
    const Mat A_perp = fr.omega * A -
                       fr.tangent * fr.tangent.transpose() * D2p * fr.rho;
    out.row_y.push_back(fr.gamma * (A - A_perp) * Pid);
    out.row_u.push_back(fr.gamma * system.g(fr.x_on_orbit));
  }
  return out;
}

TransverseFrame transverse_frame(const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size) {
  TransverseFrame out;
  out.s_grid = closed_grid(orbit, grid_size);
  out.period = orbit.s_T;
  const int n = system.n;
  Mat prev;
  for (long i = 0; i < out.s_grid.size(); ++i) {
    const ProjectionFrame fr = frame_at(system, orbit, out.s_grid[i]);
    const Vec g = fr.gamma.transpose();
    const Mat P = Mat::Identity(n, n) - g * g.transpose() / g.squaredNorm();
    Mat basis(n, n - 1);
    if (i == 0) {
      // Deterministic seed: orthonormal kernel basis from the SVD of Gamma.
      Eigen::JacobiSVD<Mat> svd(Mat(fr.gamma), Eigen::ComputeFullV);
      basis = svd.matrixV().rightCols(n - 1);
    } else {
      basis = P * prev;
    }
    // Gram-Schmidt with sign alignment against the previous sample.
    for (int c = 0; c < n - 1; ++c) {
      for (int p = 0; p < c; ++p)
        basis.col(c) -= basis.col(p).dot(basis.col(c)) * basis.col(p);
      const double nc = basis.col(c).norm();
      if (nc < 1e-10)
        throw RankDeficient("transverse frame continuation collapsed");
      basis.col(c) /= nc;
      if (i > 0 && basis.col(c).dot(prev.col(c)) < 0.0) basis.col(c) *= -1.0;
    }
    out.phi.push_back(basis);
    prev = basis;
  }
  out.end_mismatch = (out.phi.back() - out.phi.front()).cwiseAbs().maxCoeff();
  out.holonomy = out.end_mismatch > 1e-6;
  if (!out.holonomy) out.phi.back() = out.phi.front();
  return out;
}

PeriodicLinearSystem reduced_pair(const ControlAffineSystem& system,
                                  const OrbitParameterization& orbit,
                                  const TransverseFrame& frame) {
  if (frame.holonomy)
    throw RankDeficient("reduced_pair requires a holonomy-free frame");
  std::vector<Mat> As, Bs;
  Vec rho(frame.s_grid.size());
  for (long i = 0; i < frame.s_grid.size(); ++i) {
    const double s = frame.s_grid[i];
    const ProjectionFrame fr = frame_at(system, orbit, s);
    const Mat A = a_matrix(system, orbit, fr, s);
    const Mat& Phi = frame.phi[static_cast<size_t>(i)];
    As.push_back(Phi.transpose() * A * Phi);
    Bs.push_back(Phi.transpose() * system.g(fr.x_on_orbit));
    rho[i] = fr.rho;
  }
  return PeriodicLinearSystem(frame.s_grid, std::move(As), std::move(Bs),
                              std::move(rho), frame.period);
}

TransverseCoordinateMap z_perp_map(const ControlAffineSystem& system,
                                   const OrbitParameterization& orbit) {
  TransverseCoordinateMap map;
  map.N = system.n;
  map.y = [&orbit](double s, const Vec& x) { return Vec(x - orbit.xs(s)); };
  map.dy_dx = [n = system.n](double, const Vec&) {
    return Mat(Mat::Identity(n, n));
  };
  map.dy_ds = [&orbit](double s, const Vec&) {
    return Vec(-orbit_tangent(orbit, s));
  };
  map.dp = [&orbit](const Vec& x) {
    const double s = project(orbit, x);
    return gamma_at(orbit, x, s);
  };
  return map;
}

}  // namespace orbistab
