#include "orbistab/riccati.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "orbistab/errors.hpp"
#include "orbistab/ode.hpp"

namespace orbistab {

namespace {

Vec flatten(const Mat& M) { return Eigen::Map<const Vec>(M.data(), M.size()); }

Mat unflatten_sq(const Vec& v, int k) {
  return Eigen::Map<const Mat>(v.data(), k, k);
}

}  // namespace

RiccatiSolution solve_prde(const PeriodicLinearSystem& plin, const Mat& Q,
                           const Mat& Rw, int max_sweeps) {
  const int k = plin.state_dim();
  const Mat Rw_inv = Rw.inverse();
  auto rhs = [&](double s, const Vec& y) {
    const Mat R = unflatten_sq(y, k);
    const Mat A = plin.A(s);
    const Mat B = plin.B(s);
    Mat dR = -(A.transpose() * R + R * A + Q -
               R * B * Rw_inv * B.transpose() * R);
    if (!dR.allFinite()) throw BlowUp("Riccati sweep diverged", s);
    return flatten(dR);
  };

  const double s0 = plin.s_start();
  const double sT = plin.period();
  Mat terminal = Mat::Identity(k, k) * (1.0 + Q.norm());
  RiccatiSolution sol;
  sol.s_grid = plin.s_grid();
  double gap = std::numeric_limits<double>::infinity();
  OdeOptions opts{1e-10, 1e-12};
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    Vec y = ode_integrate(rhs, s0 + sT, s0, flatten(terminal), opts);
    Mat R0 = unflatten_sq(y, k);
    R0 = 0.5 * (R0 + R0.transpose());
    gap = (R0 - terminal).norm();
    sol.sweeps = sweep;
    terminal = R0;
    if (gap < 1e-9) {
      sol.converged = true;
      break;
    }
  }
  sol.periodicity_gap = gap;
  if (!sol.converged)
    throw NotConverged("periodic Riccati sweeps did not settle", gap);

  // Final pass storing samples on the system grid (backward, then reversed).
  const long np1 = sol.s_grid.size();
  std::vector<double> s_out;
  for (long i = np1 - 1; i >= 0; --i) s_out.push_back(sol.s_grid[i]);
  auto path = ode_integrate_path(rhs, s0 + sT, s_out, flatten(terminal), opts);
  sol.R_samples.assign(static_cast<size_t>(np1), Mat());
  for (long i = 0; i < np1; ++i) {
    Mat R = unflatten_sq(path[static_cast<size_t>(np1 - 1 - i)], k);
    sol.R_samples[static_cast<size_t>(i)] = 0.5 * (R + R.transpose());
  }
  sol.R_samples.back() = sol.R_samples.front();
  sol.residual_max = prde_residual(sol.R_samples, plin, Q, Rw, false);
  return sol;
}

GainSchedule gain_from_riccati(const RiccatiSolution& sol,
                               const PeriodicLinearSystem& plin,
                               const Mat& Rw) {
  const Mat Rw_inv = Rw.inverse();
  std::vector<Mat> K;
  for (long i = 0; i < sol.s_grid.size(); ++i)
    K.push_back(-Rw_inv * plin.B(sol.s_grid[i]).transpose() *
                sol.R_samples[static_cast<size_t>(i)]);
  K.back() = K.front();
  return GainSchedule(sol.s_grid, std::move(K), plin.period());
}

double prde_residual(const std::vector<Mat>& R_samples,
                     const PeriodicLinearSystem& plin, const Mat& Q,
                     const Mat& Rw, bool projected) {
  const Vec& grid = plin.s_grid();
  const int N = static_cast<int>(grid.size()) - 1;
  const int k = plin.state_dim();
  const Mat Rw_inv = Rw.inverse();

  // dR/ds entrywise by spectral periodic differencing (endpoint excluded).
  std::vector<Mat> dR(static_cast<size_t>(N), Mat::Zero(k, k));
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) {
      Vec chan(N);
      for (int i = 0; i < N; ++i) chan[i] = R_samples[static_cast<size_t>(i)](r, c);
      Vec d = spectral_derivative(chan, plin.period());
      for (int i = 0; i < N; ++i) dR[static_cast<size_t>(i)](r, c) = d[i];
    }

  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    const double s = grid[i];
    const Mat& R = R_samples[static_cast<size_t>(i)];
    const Mat A = plin.A(s);
    const Mat B = plin.B(s);
    Mat res = dR[static_cast<size_t>(i)] + A.transpose() * R + R * A + Q -
              R * B * Rw_inv * B.transpose() * R;
    if (projected) {
      const Mat Om = plin.omega(s);
      res = Om.transpose() * res * Om;
    }
    worst = std::max(worst, res.norm());
  }
  return worst;
}

GainSchedule analytic_example_gain(double a, int grid_size) {
  (void)a;
  Vec grid(grid_size + 1);
  std::vector<Mat> K;
  for (int i = 0; i <= grid_size; ++i) {
    grid[i] = 2.0 * M_PI * i / grid_size;
    Mat Ki(1, 3);
    Ki << -std::sin(grid[i]), -std::cos(grid[i]), -1.0;
    K.push_back(Ki);
  }
  K.back() = K.front();
  return GainSchedule(std::move(grid), std::move(K), 2.0 * M_PI);
}

std::vector<Mat> analytic_example_khat(double a, const Vec& s_grid) {
  std::vector<Mat> out;
  for (long i = 0; i < s_grid.size(); ++i) {
    const double sn = std::sin(s_grid[i]);
    const double cs = std::cos(s_grid[i]);
    Mat K(3, 3);
    K << a, 0.0, a * sn,
         0.0, a, a * cs,
         sn, cs, 1.0;
    out.push_back(K);
  }
  return out;
}

std::vector<Mat> closed_form_riccati_family(double a, double k, int i, int j,
                                            const Vec& s_grid) {
  const Mat D = Eigen::Vector3d(1.0 / a, 1.0 / a, 1.0).asDiagonal();
  std::vector<Mat> out;
  for (long idx = 0; idx < s_grid.size(); ++idx) {
    const double s = s_grid[idx];
    const double sn = std::sin(s);
    const double cs = std::cos(s);
    Vec t(3);
    t << a * cs, -a * sn, 0.0;
    const Mat Om = Mat::Identity(3, 3) - t * t.transpose() / t.squaredNorm();
    Mat R = D;
    for (int p = 0; p < i; ++p) R = Om * R;
    for (int p = 0; p < j; ++p) R = R * Om;
    R += k * (t * t.transpose()) / (a * a);
    out.push_back(0.5 * (R + R.transpose()));
  }
  return out;
}

}  // namespace orbistab
