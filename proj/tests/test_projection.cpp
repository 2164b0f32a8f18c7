#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>

#include "helpers.hpp"
#include "orbistab/errors.hpp"
#include "orbistab/projection.hpp"

using namespace orbistab;
using orbistab::test::circle;
using orbistab::test::uniform;

TEST_CASE("projection is a left inverse on the orbit") {
  auto reg = circle(1.0);
  for (int i = 0; i < 100; ++i) {
    const double s = 2.0 * M_PI * i / 100.0;
    CHECK(std::abs(project(reg.orbit, reg.orbit.xs(s)) - s) < 1e-10);
  }
}

TEST_CASE("projection of hand-picked points") {
  auto reg = circle(1.0);
  CHECK(project(reg.orbit, (Vec(3) << 0, 2, 0.3).finished()) ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK(project(reg.orbit, (Vec(3) << 1, 1, 0).finished()) ==
        doctest::Approx(M_PI_4).epsilon(1e-10));
}

TEST_CASE("projection residual is orthogonal for random tube points") {
  auto reg = circle(1.0);
  for (int i = 0; i < 100; ++i) {
    const double s = uniform(0.0, 2.0 * M_PI);
    Vec z(3);
    z << uniform(-0.15, 0.15), uniform(-0.15, 0.15), uniform(-0.15, 0.15);
    const Vec t = orbit_tangent(reg.orbit, s);
    const Vec x = reg.orbit.xs(s) + z - t * t.dot(z) / t.squaredNorm();
    if (z.norm() > 0.2) continue;
    const double p = project(reg.orbit, x, s);
    CHECK(std::abs(orbit_tangent(reg.orbit, p).dot(x - reg.orbit.xs(p))) <
          1e-9 * (1.0 + x.norm()));
  }
}

TEST_CASE("equidistant point is flagged as ambiguous") {
  auto reg = circle(1.0);
  CHECK_THROWS_AS(project(reg.orbit, (Vec(3) << 0, 0, 0.5).finished()),
                  ProjectionAmbiguous);
  // With a hint the tie is broken by continuity.
  CHECK(std::isfinite(
      project(reg.orbit, (Vec(3) << 0.0, 0.2, 0.5).finished(), 0.0)));
}

TEST_CASE("projection Jacobian row on and off the orbit") {
  auto reg = circle(1.0);
  const RowVec on = gamma_at(reg.orbit, reg.orbit.xs(0.0), 0.0);
  CHECK((on - (RowVec(3) << 1, 0, 0).finished()).norm() < 1e-12);

  const RowVec off =
      gamma_at(reg.orbit, (Vec(3) << 0, 1.5, 0).finished(), 0.0);
  CHECK((off - (RowVec(3) << 1.0 / 1.5, 0, 0).finished()).norm() < 1e-12);

  CHECK_THROWS_AS(gamma_at(reg.orbit, (Vec(3) << 0, 0, 0).finished(), 0.0),
                  FocalPointReached);
}

TEST_CASE("frame at the top of the circle") {
  auto reg = circle(1.0);
  const ProjectionFrame fr = frame_at(reg.system, reg.orbit, 0.0);
  Mat expected(3, 3);
  expected << 0, 0, 0, 0, 1, 0, 0, 0, 1;
  CHECK((fr.omega - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fr.rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fr.theta == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("frame identities hold at random parameters") {
  auto reg = circle(1.4);
  for (int i = 0; i < 100; ++i) {
    const double s = uniform(0.0, 2.0 * M_PI);
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, s);
    CHECK(std::abs(fr.gamma.dot(fr.tangent) - 1.0) < 1e-9);
    CHECK((fr.omega * fr.omega - fr.omega).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fr.gamma * fr.omega).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fr.omega * fr.tangent).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(fr.rho > 0.0);
    Eigen::JacobiSVD<Mat> svd(fr.omega);
    int small = 0;
    for (int j = 0; j < 3; ++j)
      if (svd.singularValues()[j] < 1e-9) ++small;
    CHECK(small == 1);
  }
}

TEST_CASE("transverse coordinates split and reconstruct") {
  auto reg = circle(1.0);
  auto [s, z] = transverse_coords(reg.system, reg.orbit,
                                  (Vec(3) << 0, 1.5, 0.2).finished());
  CHECK(s == doctest::Approx(0.0).epsilon(1e-10));
  CHECK((z - (Vec(3) << 0, 0.5, 0.2).finished()).norm() < 1e-10);

  // Radial perturbations keep the parameter fixed.
  const double sbar = 1.1;
  const double eps = 0.07;
  const Vec x = (1.0 + eps) * reg.orbit.xs(sbar);
  auto [s2, z2] = transverse_coords(reg.system, reg.orbit, x);
  CHECK(s2 == doctest::Approx(sbar).epsilon(1e-10));
  CHECK((z2 - eps * reg.orbit.xs(sbar)).norm() < 1e-9);

  // On the orbit the coordinates vanish.
  auto [s3, z3] = transverse_coords(reg.system, reg.orbit, reg.orbit.xs(2.0));
  CHECK(s3 == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(z3.norm() < 1e-12);
}
