#include "orbistab/floquet.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "orbistab/errors.hpp"
#include "orbistab/ode.hpp"
#include "orbistab/projection.hpp"
#include "orbistab/transverse.hpp"

namespace orbistab {

namespace {

Mat closed_loop_drift(const PeriodicLinearSystem& plin, const GainSchedule* gain,
                      GainClosure closure, double s) {
  Mat A = plin.A(s);
  if (gain) {
    Mat K = gain->K(s);
    if (closure == GainClosure::gain_times_omega) K = K * plin.omega(s);
    A += plin.B(s) * K;
  }
  return A;
}

}  // namespace

Mat monodromy(const PeriodicLinearSystem& plin, const GainSchedule* gain,
              GainClosure closure, const OdeOptions& opts) {
  if (gain && closure == GainClosure::gain_times_omega && !plin.has_omega())
    throw std::logic_error("gain_times_omega closure needs Omega samples");
  const int k = plin.state_dim();
  const double s0 = plin.s_start();
  auto rhs = [&](double s, const Vec& y) {
    const Mat X = Eigen::Map<const Mat>(y.data(), k, k);
    const Mat dX = closed_loop_drift(plin, gain, closure, s) * X / plin.rho(s);
    return Vec(Eigen::Map<const Vec>(dX.data(), k * k));
  };
  Mat X0 = Mat::Identity(k, k);
  Vec y0 = Eigen::Map<Vec>(X0.data(), k * k);
  Vec yT = ode_integrate(rhs, s0, s0 + plin.period(), std::move(y0), opts);
  return Eigen::Map<Mat>(yT.data(), k, k);
}

FloquetSpectrum spectrum(const Mat& monodromy_matrix, double T_period) {
  FloquetSpectrum out;
  out.T_period = T_period;
  Eigen::EigenSolver<Mat> es(monodromy_matrix);
  for (int i = 0; i < monodromy_matrix.rows(); ++i)
    out.multipliers.push_back(es.eigenvalues()[i]);
  std::sort(out.multipliers.begin(), out.multipliers.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              return std::abs(a) > std::abs(b);
            });
  for (const auto& mu : out.multipliers)
    out.exponents.push_back(std::log(mu) / T_period);
  int best = -1;
  double best_d = out.zero_tol;
  for (size_t i = 0; i < out.multipliers.size(); ++i) {
    const double d = std::abs(out.multipliers[i] - 1.0);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  if (best >= 0) out.zero_exponent_index = best;
  return out;
}

nlohmann::json FloquetSpectrum::to_json() const {
  nlohmann::json j;
  auto cplx = [](const std::vector<std::complex<double>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& z : v) arr.push_back({{"re", z.real()}, {"im", z.imag()}});
    return arr;
  };
  j["multipliers"] = cplx(multipliers);
  j["exponents"] = cplx(exponents);
  j["T_period"] = T_period;
  if (zero_exponent_index) j["zero_exponent_index"] = *zero_exponent_index;
  return j;
}

StabilityVerdict andronov_vitt_verdict(const FloquetSpectrum& spec) {
  int on_circle = 0;
  bool outside = false;
  for (const auto& mu : spec.multipliers) {
    const double r = std::abs(mu);
    if (r > 1.0 + spec.zero_tol)
      outside = true;
    else if (r > 1.0 - spec.zero_tol)
      ++on_circle;
  }
  if (outside) return StabilityVerdict::unstable;
  const bool unit_is_structural =
      spec.zero_exponent_index.has_value() && on_circle == 1;
  return unit_is_structural ? StabilityVerdict::orbitally_stable
                            : StabilityVerdict::inconclusive;
}

const char* to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::orbitally_stable:
      return "orbitally_stable";
    case StabilityVerdict::inconclusive:
      return "inconclusive";
    case StabilityVerdict::unstable:
      return "unstable";
  }
  return "unknown";
}

double trace_exponent_sum(const Vec& s_grid, const std::vector<Mat>& drift,
                          const Vec& rho_samples) {
  Vec integrand(s_grid.size());
  for (long i = 0; i < s_grid.size(); ++i)
    integrand[i] = drift[static_cast<size_t>(i)].trace() / rho_samples[i];
  return periodic_trapezoid(s_grid, integrand);
}

ExponentSumReport exponent_sum_check(const ControlAffineSystem& system,
                                     const OrbitParameterization& orbit,
                                     const GainSchedule& gain, int grid_size) {
  ExponentSumReport rep;
  rep.s_T = orbit.s_T;
  Vec grid(grid_size + 1), rho(grid_size + 1);
  std::vector<Mat> d_tvl, d_first, d_comp;
  for (int i = 0; i <= grid_size; ++i) {
    const double s = orbit.s0 + orbit.s_T * i / grid_size;
    grid[i] = s;
    const ProjectionFrame fr = frame_at(system, orbit, s);
    rho[i] = fr.rho;
    const Mat A = a_matrix(system, orbit, fr, s);
    const Mat Ap = a_perp_orthogonal(system, orbit, fr, s);
    const Mat B = system.g(fr.x_on_orbit);
    const Mat Bp = fr.omega * B;
    const Mat KO = gain.K(s) * fr.omega;
    d_tvl.push_back(Ap + Bp * KO);
    d_first.push_back(A + B * KO);
    d_comp.push_back(fr.omega * A + fr.omega * B * KO);
  }
  rep.sum_tvl = trace_exponent_sum(grid, d_tvl, rho);
  rep.sum_first_approx = trace_exponent_sum(grid, d_first, rho);
  rep.sum_comparison = trace_exponent_sum(grid, d_comp, rho);

  // Closed-orbit increment of ln ||flow||: the trace integral of the
  // rank-one term, which telescopes to zero around the loop.
  {
    Vec integrand(grid.size());
    for (long i = 0; i < grid.size(); ++i) {
      const ProjectionFrame fr = frame_at(system, orbit, grid[i]);
      const Mat A = a_matrix(system, orbit, fr, grid[i]);
      integrand[i] = fr.tangent.dot(A.transpose() * fr.tangent) /
                     fr.tangent.squaredNorm() / rho[i];
    }
    rep.vanishing_term = periodic_trapezoid(grid, integrand);
  }

  const double tol = 1e-6 * orbit.s_T;
  rep.pass = std::abs(rep.sum_tvl - rep.sum_first_approx) < tol &&
             std::abs(rep.sum_tvl - rep.sum_comparison) < tol &&
             std::abs(rep.vanishing_term) < tol;
  return rep;
}

GrowthConstantReport estimate_growth_constants(
    const PeriodicLinearSystem& closed_loop, double alpha,
    int horizon_periods) {
  GrowthConstantReport rep;
  rep.alpha = alpha;
  const FloquetSpectrum spec =
      spectrum(monodromy(closed_loop), closed_loop.time_period());
  rep.lambda_M = -std::numeric_limits<double>::infinity();
  for (const auto& lam : spec.exponents)
    rep.lambda_M = std::max(rep.lambda_M, lam.real());

  // Track ||Phi(t)|| e^{-lambda_M t} along the flow; the state carries
  // vec(Phi) plus the elapsed physical time.
  const int k = closed_loop.state_dim();
  const double s0 = closed_loop.s_start();
  auto rhs = [&](double s, const Vec& y) {
    const Mat X = Eigen::Map<const Mat>(y.data(), k, k);
    const double inv_rho = 1.0 / closed_loop.rho(s);
    const Mat dX = closed_loop.A(s) * X * inv_rho;
    Vec dy(k * k + 1);
    dy.head(k * k) = Eigen::Map<const Vec>(dX.data(), k * k);
    dy[k * k] = inv_rho;
    return dy;
  };
  Mat X0 = Mat::Identity(k, k);
  Vec y0(k * k + 1);
  y0.head(k * k) = Eigen::Map<Vec>(X0.data(), k * k);
  y0[k * k] = 0.0;

  // Sample the transition matrix over horizon_periods + 1 laps and scan
  // pairs (t, tau): C >= ||Phi(t) Phi(tau)^-1|| e^{-lambda_M (t - tau)},
  // with tau ranging over the first lap.
  const int samples_per_lap = 64;
  std::vector<double> s_out;
  for (int p = 0; p <= horizon_periods; ++p)
    for (int i = (p == 0 ? 0 : 1); i <= samples_per_lap; ++i)
      s_out.push_back(s0 + closed_loop.period() * (p + double(i) / samples_per_lap));
  const auto path = ode_integrate_path(rhs, s0, s_out, std::move(y0));
  std::vector<Mat> Phi;
  std::vector<double> tv;
  for (const Vec& y : path) {
    Phi.push_back(Eigen::Map<const Mat>(y.data(), k, k));
    tv.push_back(y[k * k]);
  }
  rep.C = 1.0;
  const double T = closed_loop.time_period();
  for (size_t j = 0; j <= static_cast<size_t>(samples_per_lap) && j < Phi.size(); ++j) {
    const Mat inv_j = Phi[j].inverse();
    for (size_t i = j; i < Phi.size(); ++i) {
      const double dt = tv[i] - tv[j];
      if (dt > horizon_periods * T + 1e-9) break;
      rep.C = std::max(rep.C, Mat(Phi[i] * inv_j).operatorNorm() *
                                  std::exp(-rep.lambda_M * dt));
    }
  }
  rep.condition_holds = rep.lambda_M < -rep.C * alpha;
  rep.heuristic = true;
  return rep;
}

Mat kernel_basis(const RowVec& gamma0) {
  const int n = static_cast<int>(gamma0.size());
  Eigen::JacobiSVD<Mat> svd(Mat(gamma0), Eigen::ComputeFullV);
  Mat V = svd.matrixV().rightCols(n - 1);
  for (int c = 0; c < V.cols(); ++c) {
    int imax = 0;
    V.col(c).cwiseAbs().maxCoeff(&imax);
    if (V(imax, c) < 0.0) V.col(c) *= -1.0;
  }
  return V;
}

Mat restrict_to_kernel(const Mat& monodromy_matrix, const RowVec& gamma0) {
  const Mat V = kernel_basis(gamma0);
  return V.transpose() * monodromy_matrix * V;
}

}  // namespace orbistab
