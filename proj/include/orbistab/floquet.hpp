#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "orbistab/dynsys.hpp"
#include "orbistab/ode.hpp"
#include "orbistab/plinsys.hpp"

namespace orbistab {

struct FloquetSpectrum {
  std::vector<std::complex<double>> multipliers;  ///< sorted by |.| descending
  std::vector<std::complex<double>> exponents;    ///< principal log / T
  double T_period = 0.0;
  std::optional<int> zero_exponent_index;  ///< structural unit multiplier
  double zero_tol = 1e-6;

  nlohmann::json to_json() const;
};

enum class GainClosure {
  direct,            ///< A + B K
  gain_times_omega,  ///< A + B K Omega (requires Omega samples)
};

/// State-transition matrix over one parameter lap: integrates
/// dX/ds = A_cl(s) X / rho(s), X(s0) = I, column by column.
Mat monodromy(const PeriodicLinearSystem& plin,
              const GainSchedule* gain = nullptr,
              GainClosure closure = GainClosure::direct,
              const OdeOptions& opts = {1e-10, 1e-12});

/// Multipliers and principal-log exponents of a monodromy matrix.
FloquetSpectrum spectrum(const Mat& monodromy_matrix, double T_period);

enum class StabilityVerdict { orbitally_stable, inconclusive, unstable };

/// Andronov-Vitt rule: exactly one simple zero exponent, the rest strictly
/// negative.
StabilityVerdict andronov_vitt_verdict(const FloquetSpectrum& spec);

const char* to_string(StabilityVerdict v);

struct ExponentSumReport {
  double sum_tvl = 0.0;         ///< trace integral, A_perp closed loop
  double sum_first_approx = 0.0;  ///< A + B K Omega
  double sum_comparison = 0.0;  ///< Omega A + Omega B K Omega
  double vanishing_term = 0.0;  ///< closed-orbit ln||f|| increment, ~0
  double s_T = 0.0;
  bool pass = false;  ///< pairwise differences < 1e-6 * s_T
};

/// Period integrals of Tr(A_cl)/rho for the three closed-loop systems that
/// share their exponent sum under u = K(s) z_perp.
ExponentSumReport exponent_sum_check(const ControlAffineSystem& system,
                                     const OrbitParameterization& orbit,
                                     const GainSchedule& gain, int grid_size);

/// Trace integral of an arbitrary sampled periodic drift (exponent sum
/// times the time period), trapezoid over the closed grid.
double trace_exponent_sum(const Vec& s_grid, const std::vector<Mat>& drift,
                          const Vec& rho_samples);

struct GrowthConstantReport {
  double C = 0.0;
  double lambda_M = 0.0;
  double alpha = 0.0;
  bool condition_holds = false;  ///< lambda_M < -C alpha
  bool heuristic = true;  ///< grid estimate, cannot certify the condition
};

/// Grid estimate of the transition-matrix growth constant C with constant
/// decay profile lambda_M. `alpha` bounds ||A(s)|| of the first
/// approximation. Heuristic by construction: the report can refute or
/// suggest the bound, never certify it.
GrowthConstantReport estimate_growth_constants(
    const PeriodicLinearSystem& closed_loop, double alpha,
    int horizon_periods);

/// Restriction of a monodromy matrix to ker(gamma0) in a deterministic
/// orthonormal kernel basis.
Mat restrict_to_kernel(const Mat& monodromy_matrix, const RowVec& gamma0);

/// Deterministic orthonormal basis of ker(gamma0), n x (n-1).
Mat kernel_basis(const RowVec& gamma0);

}  // namespace orbistab
