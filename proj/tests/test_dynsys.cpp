#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "orbistab/dynsys.hpp"
#include "orbistab/errors.hpp"
#include "orbistab/finite_diff.hpp"

using namespace orbistab;
using orbistab::test::circle;

TEST_CASE("orbit tangent of the circle parameterization") {
  auto reg = circle(1.0);
  CHECK((orbit_tangent(reg.orbit, 0.0) - (Vec(3) << 1, 0, 0).finished())
            .norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((orbit_tangent(reg.orbit, M_PI_2) - (Vec(3) << 0, -1, 0).finished())
            .norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tangent norm is constant on the circle") {
  const double a = 1.7;
  auto reg = circle(a);
  for (int i = 0; i < 20; ++i) {
    const double s = 2.0 * M_PI * i / 20.0;
    CHECK(orbit_tangent(reg.orbit, s).norm() == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("tangent falls back to finite differences") {
  auto reg = circle(1.0);
  OrbitParameterization fd = reg.orbit;
  fd.dxs = nullptr;
  fd.d2xs = nullptr;
  for (int i = 0; i < 10; ++i) {
    const double s = 2.0 * M_PI * i / 10.0;
    CHECK((orbit_tangent(fd, s) - orbit_tangent(reg.orbit, s)).norm() < 1e-9);
    CHECK((orbit_curvature(fd, s) - orbit_curvature(reg.orbit, s)).norm() <
          1e-7);
  }
}

TEST_CASE("tangent is periodic") {
  auto reg = circle(0.8);
  for (int i = 0; i < 20; ++i) {
    const double sv = 0.3 + i * 0.31;
    CHECK((orbit_tangent(reg.orbit, sv) -
           orbit_tangent(reg.orbit, sv + reg.orbit.s_T))
              .norm() < 1e-9);
  }
}

TEST_CASE("degenerate parameterization is rejected") {
  OrbitParameterization bad;
  bad.s0 = 0.0;
  bad.s_T = 1.0;
  bad.xs = [](double) { return Vec(Vec::Zero(3)); };
  CHECK_THROWS_AS(orbit_tangent(bad, 0.5), DegenerateTangent);
}

TEST_CASE("orbit residual certifies the circle orbits") {
  for (double a : {1.0, 2.0}) {
    auto reg = circle(a);
    const auto rep = verify_orbit(reg.system, reg.orbit, 128);
    CHECK(rep.max_residual < 1e-10);
    CHECK(rep.certified());
  }
}

TEST_CASE("orbit residual detects a non-orbit") {
  auto reg = circle(1.0);
  ControlAffineSystem wrong = reg.system;
  auto base_f = reg.system.f;
  wrong.f = [base_f](const Vec& x) {
    Vec out = base_f(x);
    out[2] += 1.0;
    return out;
  };
  wrong.df = nullptr;
  const auto rep = verify_orbit(wrong, reg.orbit, 64);
  CHECK(rep.max_residual == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("drift matrix matches the hand Jacobian on the orbit") {
  const double a = 1.3;
  auto reg = circle(a);
  for (double s : {0.0, 0.9, 2.5, 5.1}) {
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, s);
    const Mat A = a_matrix(reg.system, reg.orbit, fr, s);
    Mat expected(3, 3);
    expected << 0.0, 1.0, a * std::sin(s),
        -1.0, 0.0, a * std::cos(s),
        0.0, 0.0, 0.0;
    CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("drift matrix of a linear vector field is constant") {
  auto reg = circle(1.0);
  ControlAffineSystem lin;
  lin.n = 3;
  lin.m = 1;
  Mat M(3, 3);
  M << 0, 1, 0, -1, 0, 0, 0, 0, -1;
  lin.f = [M](const Vec& x) { return Vec(M * x); };
  lin.g = [](const Vec&) { return Mat(Mat::Zero(3, 1)); };
  for (double s : {0.1, 1.0, 4.0}) {
    const ProjectionFrame fr = frame_at(lin, reg.orbit, s);
    const Mat A = a_matrix(lin, reg.orbit, fr, s);
    CHECK((A - M).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("analytic Jacobian agrees with finite differences") {
  auto reg = circle(1.0);
  for (int i = 0; i < 50; ++i) {
    const double s = orbistab::test::uniform(0.0, 2.0 * M_PI);
    Vec x = reg.orbit.xs(s);
    for (int j = 0; j < 3; ++j) x[j] += orbistab::test::uniform(-0.1, 0.1);
    const Mat exact = reg.system.jacobian_f(x);
    const Mat fd = fd_jacobian(reg.system.f, x);
    CHECK((exact - fd).cwiseAbs().maxCoeff() <
          1e-5 * (1.0 + exact.cwiseAbs().maxCoeff()));
    const Mat gexact = reg.system.jacobian_g(0, x);
    const Mat gfd = fd_jacobian(
        [&](const Vec& xv) { return Vec(reg.system.g(xv).col(0)); }, x);
    CHECK((gexact - gfd).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("nominal-input drift term toggles with the flag") {
  auto reg = circle(1.0);
  ControlAffineSystem driven = reg.system;
  driven.nominal_input = [](double) { return Vec(Vec::Zero(1)); };
  const ProjectionFrame fr = frame_at(driven, reg.orbit, 0.7);
  const Mat A0 = a_matrix(driven, reg.orbit, fr, 0.7, false);
  const Mat A1 = a_matrix(driven, reg.orbit, fr, 0.7, true);
  CHECK((A0 - A1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("registry round trip") {
  const auto names = registered_system_names();
  CHECK(std::find(names.begin(), names.end(), "bh-circle") != names.end());
  CHECK_THROWS_AS(make_system("no-such-system"), std::out_of_range);
}
