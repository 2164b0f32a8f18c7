#pragma once

#include <cmath>
#include <random>

#include "orbistab/projection.hpp"
#include "orbistab/registry.hpp"
#include "orbistab/transverse.hpp"

namespace orbistab::test {

inline RegisteredSystem circle(double a = 1.0) {
  return make_system("bh-circle", {{"a", a}});
}

// Analytic projection Jacobian row for the circle example:
// p(x) = atan2(x1, x2), Dp = (x2, -x1, 0) / (x1^2 + x2^2).
inline std::function<RowVec(const Vec&)> circle_dp() {
  return [](const Vec& x) {
    RowVec r(3);
    const double d = x[0] * x[0] + x[1] * x[1];
    r << x[1] / d, -x[0] / d, 0.0;
    return r;
  };
}

// The identity transverse map for the circle with analytic callbacks.
inline TransverseCoordinateMap circle_z_map(const RegisteredSystem& reg) {
  TransverseCoordinateMap map = z_perp_map(reg.system, reg.orbit);
  map.dp = circle_dp();
  return map;
}

// Minimal transverse pair for the circle:
// y1 = ln sqrt(x1^2 + x2^2) - ln a - x3, y2 = x3.
inline TransverseCoordinateMap circle_minimal_map(double a) {
  TransverseCoordinateMap map;
  map.N = 2;
  map.y = [a](double, const Vec& x) {
    Vec out(2);
    out << 0.5 * std::log(x[0] * x[0] + x[1] * x[1]) - std::log(a) - x[2],
        x[2];
    return out;
  };
  map.dy_dx = [](double, const Vec& x) {
    const double d = x[0] * x[0] + x[1] * x[1];
    Mat J(2, 3);
    J << x[0] / d, x[1] / d, -1.0,
         0.0, 0.0, 1.0;
    return J;
  };
  map.dy_ds = [](double, const Vec&) { return Vec(Vec::Zero(2)); };
  map.dp = circle_dp();
  return map;
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20240811u);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

}  // namespace orbistab::test
