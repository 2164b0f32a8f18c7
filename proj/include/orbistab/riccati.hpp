#pragma once

#include <vector>

#include "orbistab/plinsys.hpp"

namespace orbistab {

struct RiccatiSolution {
  Vec s_grid;
  std::vector<Mat> R_samples;  ///< symmetric k x k
  double residual_max = 0.0;
  double periodicity_gap = 0.0;
  bool converged = false;
  int sweeps = 0;
};

/// Stabilizing periodic solution of
///   dR/ds + A^T R + R A + Q - R B Rw^-1 B^T R = 0
/// on the (unconstrained) comparison system, by backward-sweep fixed-point
/// iteration. Throws NotConverged / BlowUp.
RiccatiSolution solve_prde(const PeriodicLinearSystem& plin_comparison,
                           const Mat& Q, const Mat& Rw, int max_sweeps = 200);

/// K(s) = -Rw^-1 B^T(s) R(s).
GainSchedule gain_from_riccati(const RiccatiSolution& sol,
                               const PeriodicLinearSystem& plin,
                               const Mat& Rw);

/// Max Frobenius residual of the PRDE over the grid; with `projected` the
/// residual is Omega^T [.] Omega (the modified equation whose solutions form
/// a family along the flow direction). dR/ds comes from spectral periodic
/// differencing of the samples.
double prde_residual(const std::vector<Mat>& R_samples,
                     const PeriodicLinearSystem& plin, const Mat& Q,
                     const Mat& Rw, bool projected);

/// The built-in circle example's analytic controller K(s) = -[sin s, cos s, 1]
/// (independent of the orbit radius a).
GainSchedule analytic_example_gain(double a, int grid_size = 512);

/// Companion matrix Khat(s) with B_perp B_perp^T R_perp == Khat Omega for the
/// circle example; used by the spectrum-sum cross-checks.
std::vector<Mat> analytic_example_khat(double a, const Vec& s_grid);

/// Closed-form solution family of the projected PRDE for the circle example:
/// R(s) = Omega^i diag(1/a,1/a,1) Omega^j + k * [rank-one trig block].
std::vector<Mat> closed_form_riccati_family(double a, double k, int i, int j,
                                            const Vec& s_grid);

}  // namespace orbistab
