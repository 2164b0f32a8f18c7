#include "orbistab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "orbistab/errors.hpp"
#include "orbistab/ode.hpp"

namespace orbistab {

std::string SimulationTrace::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const int n = states.empty() ? 0 : static_cast<int>(states[0].size());
  const int m = inputs.empty() ? 0 : static_cast<int>(inputs[0].size());
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  os << ",s,z_norm";
  for (int i = 0; i < m; ++i) os << ",u" << i;
  os << "\n";
  for (size_t r = 0; r < times.size(); ++r) {
    os << times[r];
    for (int i = 0; i < n; ++i) os << "," << states[r][i];
    os << "," << s_values[r] << "," << z_norms[r];
    for (int i = 0; i < m; ++i) os << "," << inputs[r][i];
    os << "\n";
  }
  return os.str();
}

SimulationTrace simulate_closed_loop(const ControlAffineSystem& system,
                                     const OrbitParameterization& orbit,
                                     const GainSchedule& gain, const Vec& x0,
                                     int horizon_periods, double dt_max) {
  SimulationTrace trace;
  double s_prev = project(orbit, x0);  // initial projection: full scan

  // Track the projection parameter alongside the state so the per-step hint
  // stays continuous across the parameter seam.
  auto control = [&](double s, const Vec& x) {
    return Vec(gain.K(s) * (x - orbit.xs(s)));
  };
  auto rhs = [&](double, const Vec& x) {
    const double s = project(orbit, x, s_prev);
    s_prev = s;
    return Vec(system.f(x) + system.g(x) * control(s, x));
  };

  // Nominal time period of one lap for output spacing.
  double T = 0.0;
  {
    const int nq = 256;
    Vec grid(nq + 1), inv(nq + 1);
    for (int i = 0; i <= nq; ++i) {
      grid[i] = orbit.s0 + orbit.s_T * i / nq;
      const ProjectionFrame fr = frame_at(system, orbit, grid[i]);
      inv[i] = 1.0 / fr.rho;
    }
    T = periodic_trapezoid(grid, inv);
  }

  const int samples_per_period = 128;
  const int total = horizon_periods * samples_per_period;
  OdeOptions opts{1e-10, 1e-12, dt_max > 0.0 ? dt_max : std::numeric_limits<double>::infinity()};

  Vec x = x0;
  double t = 0.0;
  double s_unwrapped = s_prev;
  auto record = [&](double tv, const Vec& xv) {
    const double s = project(orbit, xv, s_prev);
    s_prev = s;
    // Unwrap across the periodic seam.
    double ds = s - std::fmod(s_unwrapped - orbit.s0, orbit.s_T) - orbit.s0;
    if (ds > 0.5 * orbit.s_T) ds -= orbit.s_T;
    if (ds < -0.5 * orbit.s_T) ds += orbit.s_T;
    s_unwrapped += ds;
    trace.times.push_back(tv);
    trace.states.push_back(xv);
    trace.s_values.push_back(s_unwrapped);
    trace.z_norms.push_back((xv - orbit.xs(s)).norm());
    trace.inputs.push_back(control(s, xv));
  };
  record(0.0, x);

  for (int step = 1; step <= total; ++step) {
    const double t_next = T * step / samples_per_period;
    try {
      x = ode_integrate(rhs, t, t_next, std::move(x), opts);
    } catch (const ProjectionAmbiguous& e) {
      trace.truncated = true;
      trace.events.push_back({t, std::string("left tube: ") + e.what()});
      return trace;
    } catch (const FocalPointReached& e) {
      trace.truncated = true;
      trace.events.push_back({t, std::string("left tube: ") + e.what()});
      return trace;
    }
    t = t_next;
    record(t, x);
  }
  return trace;
}

ConvergenceMetrics orbital_convergence_metrics(
    const SimulationTrace& trace, const ControlAffineSystem& system,
    const OrbitParameterization& orbit, double noise_floor) {
  if (trace.times.size() < 8)
    throw InsufficientData("trace too short for convergence metrics");
  const double t_span = trace.times.back() - trace.times.front();

  ConvergenceMetrics out;
  out.final_distance = trace.z_norms.back();

  // Log-linear fit of ||z|| over samples above the integrator noise floor,
  // skipping an initial transient window.
  const double t_start = trace.times.front() + 0.1 * t_span;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < trace.times.size(); ++i) {
    if (trace.times[i] < t_start) continue;
    if (trace.z_norms[i] <= noise_floor) continue;
    const double xi = trace.times[i];
    const double yi = std::log(trace.z_norms[i]);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    ++n;
  }
  if (n >= 4) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.fitted_decay_rate = -slope;
  }
  out.fit_samples = n;

  // Phase drift: observed parameter advance minus the integral of the
  // nominal speed rho(s(t)) along the trace.
  double advance = 0.0;
  for (size_t i = 0; i + 1 < trace.times.size(); ++i) {
    const double r0 =
        frame_at(system, orbit, orbit.wrap(trace.s_values[i])).rho;
    const double r1 =
        frame_at(system, orbit, orbit.wrap(trace.s_values[i + 1])).rho;
    advance += 0.5 * (r0 + r1) * (trace.times[i + 1] - trace.times[i]);
  }
  out.phase_drift =
      (trace.s_values.back() - trace.s_values.front()) - advance;
  return out;
}

LinearTrace simulate_linear(const PeriodicLinearSystem& plin,
                            const GainSchedule* gain, const Vec& dz0,
                            int periods, int samples_per_period) {
  LinearTrace out;
  const double s0 = plin.s_start();
  const double sT = plin.period();
  auto closed_A = [&](double s) {
    Mat A = plin.A(s);
    if (gain) A += plin.B(s) * gain->K(s);
    return A;
  };
  auto rhs = [&](double s, const Vec& z) {
    return Vec(closed_A(s) * z / plin.rho(s));
  };

  Vec z = dz0;
  double s = s0;
  double t = 0.0;
  OdeOptions opts{1e-10, 1e-12};
  const int total = periods * samples_per_period;
  out.s_values.push_back(s);
  out.times.push_back(0.0);
  out.dz.push_back(z);
  for (int step = 1; step <= total; ++step) {
    const double s_next = s0 + sT * step / samples_per_period;
    z = ode_integrate(rhs, s, s_next, std::move(z), opts);
    // Physical time increment for the record.
    auto tick = [&](double sv, const Vec& yv) {
      (void)yv;
      return Vec(Vec::Constant(1, 1.0 / plin.rho(sv)));
    };
    t += ode_integrate(tick, s, s_next, Vec::Zero(1), opts)[0];
    s = s_next;
    if (plin.has_constraint()) {
      const Mat C = plin.constraint(s);
      out.max_constraint_drift =
          std::max(out.max_constraint_drift, (C * z).cwiseAbs().maxCoeff());
      if (plin.has_omega()) z = plin.omega(s) * z;
    }
    out.s_values.push_back(s);
    out.times.push_back(t);
    out.dz.push_back(z);
  }
  return out;
}

}  // namespace orbistab
