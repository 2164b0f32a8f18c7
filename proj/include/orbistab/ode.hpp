#pragma once

#include <functional>
#include <limits>

#include "orbistab/types.hpp"

namespace orbistab {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
};

using OdeRhs = std::function<Vec(double, const Vec&)>;

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (either direction).
/// Throws IntegrationFailure on step underflow or non-finite states.
Vec ode_integrate(const OdeRhs& rhs, double t0, double t1, Vec y0,
                  const OdeOptions& opts = {});

/// Same, but additionally reports the state at each requested output time
/// (t_out must be monotone from t0 towards t1).
std::vector<Vec> ode_integrate_path(const OdeRhs& rhs, double t0,
                                    const std::vector<double>& t_out, Vec y0,
                                    const OdeOptions& opts = {});

}  // namespace orbistab
