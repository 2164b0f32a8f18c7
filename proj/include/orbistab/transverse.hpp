#pragma once

#include <functional>
#include <vector>

#include "orbistab/plinsys.hpp"
#include "orbistab/projection.hpp"

namespace orbistab {

/// User-supplied transverse coordinate map y(s, x) with N components,
/// vanishing on the orbit. Derivative callbacks are optional; finite
/// differences fill the gaps. `dp` is the Jacobian row of the paired
/// projection operator as a function of x (used for the Hessian term of the
/// general linearization); when absent the orthogonal projection is assumed.
struct TransverseCoordinateMap {
  int N = 0;
  std::function<Vec(double, const Vec&)> y;
  std::function<Mat(double, const Vec&)> dy_dx;   ///< optional, N x n
  std::function<Vec(double, const Vec&)> dy_ds;   ///< optional
  std::function<RowVec(const Vec&)> dp;           ///< optional Dp(x)
};

/// Simplified orthogonal-coordinates drift (valid with the orthogonal p):
/// Omega A - (x_s' x_s'^T / ||x_s'||^2) A^T.
Mat a_perp_orthogonal(const ControlAffineSystem& system,
                      const OrbitParameterization& orbit,
                      const ProjectionFrame& frame, double s);

/// Omega(s) g(x_s(s)).
Mat b_perp(const ControlAffineSystem& system,
           const OrbitParameterization& orbit, const ProjectionFrame& frame,
           double s);

/// Constrained transverse linearization of z_perp for the orthogonal p:
/// d/dt dz = A_perp dz + B_perp u, Gamma dz = 0.
PeriodicLinearSystem tvl_orthogonal(const ControlAffineSystem& system,
                                    const OrbitParameterization& orbit,
                                    int grid_size);

/// Unconstrained comparison system: wdot = Omega A w + Omega B v.
PeriodicLinearSystem comparison_system(const ControlAffineSystem& system,
                                       const OrbitParameterization& orbit,
                                       int grid_size);

/// Structured inverse of Pi(s) restricted to the transverse plane:
/// three cases by N vs n. Throws RankDeficient.
Mat pi_dagger(const Mat& Pi, const ProjectionFrame& frame);

struct TransverseValidationReport {
  bool pass = false;
  double max_vanish_residual = 0.0;
  bool rank_dy_dx_ok = true;   ///< rank d(y)/dx == min(N, n) everywhere
  bool rank_total_ok = true;   ///< rank of total derivative == n - 1
  std::vector<double> s_values;
  std::vector<double> vanish_residuals;
};

/// Checks that `map` is a valid set of transverse coordinates on a grid.
TransverseValidationReport validate_transverse_coords(
    const TransverseCoordinateMap& map, const ControlAffineSystem& system,
    const OrbitParameterization& orbit, int grid_size);

/// General transverse linearization for any valid coordinate map:
/// d/dt dy = [Pi A_perp + Xi] Pi^dagger dy + Pi B_perp u, with the
/// constraint row Gamma Pi^dagger. The projection Hessian enters through
/// central differences of the Dp callback.
PeriodicLinearSystem tvl_general(const TransverseCoordinateMap& map,
                                 const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size);

/// Minimal-coordinate form for y = y(x), N = n - 1:
/// d/ds dy = (1/rho) [Df_perp Psi^+ dy + g_perp u].
PeriodicLinearSystem minimal_tvl(const TransverseCoordinateMap& map,
                                 const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size);

struct PhaseVariationSystem {
  Vec s_grid;
  std::vector<RowVec> row_y;  ///< coefficient on dy_perp
  std::vector<RowVec> row_u;  ///< coefficient on u
  double period = 0.0;
};

/// First-approximation system of the phase mismatch psi along the orbit.
PhaseVariationSystem phase_variation_system(const ControlAffineSystem& system,
                                            const OrbitParameterization& orbit,
                                            const TransverseCoordinateMap& map,
                                            int grid_size);

struct TransverseFrame {
  Vec s_grid;
  std::vector<Mat> phi;  ///< n x (n-1) orthonormal kernel bases of Gamma(s)
  bool holonomy = false;  ///< end-of-period basis failed to match the start
  double end_mismatch = 0.0;
  double period = 0.0;
};

/// Smooth orthonormal basis of ker Gamma(s), built by continuation
/// Gram-Schmidt with sign alignment.
TransverseFrame transverse_frame(const ControlAffineSystem& system,
                                 const OrbitParameterization& orbit,
                                 int grid_size);

/// (n-1)-dimensional reduced pair (Phi^T A Phi, Phi^+ B). Stabilizability
/// diagnosis only; stability verdicts defer to the full constrained TVL.
PeriodicLinearSystem reduced_pair(const ControlAffineSystem& system,
                                  const OrbitParameterization& orbit,
                                  const TransverseFrame& frame);

/// The identity z_perp map as a TransverseCoordinateMap (N = n).
TransverseCoordinateMap z_perp_map(const ControlAffineSystem& system,
                                   const OrbitParameterization& orbit);

}  // namespace orbistab
