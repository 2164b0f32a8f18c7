#pragma once

#include <functional>

#include "orbistab/types.hpp"

namespace orbistab {

/// Default step for state-direction differences.
inline double fd_state_step(const Vec& x) { return (1.0 + x.norm()) * 1e-5; }

/// 5-point central first derivative of a vector-valued curve.
template <class F>
auto fd_derivative5(const F& f, double t, double h) -> decltype(f(t)) {
  return (f(t - 2 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2 * h)) /
         (12.0 * h);
}

/// Jacobian of f : R^n -> R^k by 5-point central differences per column.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                double step = 0.0);

}  // namespace orbistab
