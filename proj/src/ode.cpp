#include "orbistab/ode.hpp"

#include <algorithm>
#include <cmath>

#include "orbistab/errors.hpp"

namespace orbistab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
  const OdeRhs& rhs;
  const OdeOptions& opts;
  double t;
  Vec y;
  Vec k1;
  double h;
  double dir;

  Stepper(const OdeRhs& rhs_, const OdeOptions& opts_, double t0, Vec y0,
          double span)
      : rhs(rhs_), opts(opts_), t(t0), y(std::move(y0)) {
    dir = span >= 0.0 ? 1.0 : -1.0;
    k1 = rhs(t, y);
    h = dir * std::min({std::abs(span) / 100.0, opts.h_max, 0.1});
    if (h == 0.0) h = dir * 1e-6;
  }

  // One accepted step, not crossing t_limit. FSAL.
  void step(double t_limit) {
    const double span_left = (t_limit - t) * dir;
    for (int attempt = 0; attempt < 200; ++attempt) {
      double hs = dir * std::min({std::abs(h), opts.h_max, span_left});
      const bool hit_end = std::abs(hs) >= span_left * (1.0 - 1e-14);
      if (std::abs(hs) < 1e-15 * (1.0 + std::abs(t)))
        throw IntegrationFailure("ODE step underflow at t=" + std::to_string(t));

      const Vec k2 = rhs(t + c2 * hs, y + hs * (a21 * k1));
      const Vec k3 = rhs(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
      const Vec k4 = rhs(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vec k5 = rhs(t + c5 * hs,
                         y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vec k6 = rhs(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 +
                                           a64 * k4 + a65 * k5));
      const Vec ynew =
          y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vec k7 = rhs(t + hs, ynew);
      const Vec errv =
          hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double err = 0.0;
      for (int i = 0; i < y.size(); ++i) {
        const double sc =
            opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(errv[i]) / sc);
      }
      if (!ynew.allFinite())
        throw IntegrationFailure("ODE produced non-finite state");

      if (err <= 1.0) {
        t = hit_end ? t_limit : t + hs;
        y = ynew;
        k1 = k7;
        const double fac =
            std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h = hs * fac;
        return;
      }
      h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
    throw IntegrationFailure("ODE step control failed to accept a step");
  }
};

}  // namespace

Vec ode_integrate(const OdeRhs& rhs, double t0, double t1, Vec y0,
                  const OdeOptions& opts) {
  if (t0 == t1) return y0;
  Stepper st(rhs, opts, t0, std::move(y0), t1 - t0);
  while ((t1 - st.t) * st.dir > 0.0) st.step(t1);
  return st.y;
}

std::vector<Vec> ode_integrate_path(const OdeRhs& rhs, double t0,
                                    const std::vector<double>& t_out, Vec y0,
                                    const OdeOptions& opts) {
  std::vector<Vec> out;
  out.reserve(t_out.size());
  if (t_out.empty()) return out;
  const double dir = t_out.back() >= t0 ? 1.0 : -1.0;
  Stepper st(rhs, opts, t0, std::move(y0), t_out.back() - t0);
  for (double tq : t_out) {
    while ((tq - st.t) * dir > 1e-14 * (1.0 + std::abs(tq))) st.step(tq);
    out.push_back(st.y);
  }
  return out;
}

}  // namespace orbistab
