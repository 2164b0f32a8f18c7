#pragma once

#include <string>
#include <vector>

#include "orbistab/plinsys.hpp"
#include "orbistab/projection.hpp"

namespace orbistab {

struct SimulationEvent {
  double time = 0.0;
  std::string what;
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> s_values;  ///< continuous lift, unwrapped across seams
  std::vector<double> z_norms;
  std::vector<Vec> inputs;
  std::vector<SimulationEvent> events;
  bool truncated = false;  ///< ended early on a LeftTube event

  std::string to_csv() const;
};

/// Nonlinear closed loop xdot = f + g u with u = K(p(x)) (x - x_s(p(x))).
/// The projection is hinted with the previous s for continuity. A
/// ProjectionAmbiguous / FocalPointReached during integration truncates the
/// trace with a LeftTube event instead of failing.
SimulationTrace simulate_closed_loop(const ControlAffineSystem& system,
                                     const OrbitParameterization& orbit,
                                     const GainSchedule& gain, const Vec& x0,
                                     int horizon_periods,
                                     double dt_max = 0.0);

struct ConvergenceMetrics {
  double final_distance = 0.0;
  double fitted_decay_rate = 0.0;  ///< from log-linear fit of ||z_perp||
  double phase_drift = 0.0;        ///< s(t_end) - s(t_0) - integral of rho
  int fit_samples = 0;
};

/// Diagnostics over a trace spanning at least 3 periods. The decay fit uses
/// the later, still-decaying portion of the trace; samples at the
/// integrator noise floor (default 1e-10) are excluded.
ConvergenceMetrics orbital_convergence_metrics(
    const SimulationTrace& trace, const ControlAffineSystem& system,
    const OrbitParameterization& orbit, double noise_floor = 1e-10);

struct LinearTrace {
  std::vector<double> s_values;
  std::vector<double> times;
  std::vector<Vec> dz;
  double max_constraint_drift = 0.0;  ///< max |Gamma dz| before re-projection
  std::vector<SimulationEvent> events;
};

/// Constrained linear simulation of d/dt dz = (A + B K) dz with per-step
/// re-projection onto ker Gamma(s) by Omega(s).
LinearTrace simulate_linear(const PeriodicLinearSystem& plin,
                            const GainSchedule* gain, const Vec& dz0,
                            int periods, int samples_per_period = 64);

}  // namespace orbistab
