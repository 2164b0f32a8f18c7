#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <cmath>

#include "helpers.hpp"
#include "orbistab/errors.hpp"
#include "orbistab/floquet.hpp"
#include "orbistab/ode.hpp"
#include "orbistab/transverse.hpp"

using namespace orbistab;
using orbistab::test::circle;
using orbistab::test::circle_minimal_map;
using orbistab::test::circle_z_map;
using orbistab::test::uniform;

namespace {

// Simplified transverse drift of the circle example, assembled from its
// hand-computed pieces.
Mat drift_closed_form(double a, double s) {
  const double sn = std::sin(s), cs = std::cos(s);
  Vec t(3);
  t << a * cs, -a * sn, 0.0;
  Mat Afull(3, 3);
  Afull << 0, 1, a * sn, -1, 0, a * cs, 0, 0, 0;
  const Mat Om = Mat::Identity(3, 3) - t * t.transpose() / t.squaredNorm();
  return Om * Afull - t * t.transpose() * Afull.transpose() / t.squaredNorm();
}

}  // namespace

TEST_CASE("simplified transverse drift at the anchor parameters") {
  auto reg = circle(1.0);
  {
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, M_PI_2);
    const Mat A = a_perp_orthogonal(reg.system, reg.orbit, fr, M_PI_2);
    Mat expected(3, 3);
    expected << 0, 1, 1, -1, 0, 0, 0, 0, 0;
    CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  {
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, 0.0);
    const Mat A = a_perp_orthogonal(reg.system, reg.orbit, fr, 0.0);
    Mat expected(3, 3);
    expected << 0, 1, 0, -1, 0, 1, 0, 0, 0;
    CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("transverse drift row identity under the annihilator") {
  auto reg = circle(1.3);
  for (int i = 0; i < 10; ++i) {
    const double s = uniform(0.0, 2.0 * M_PI);
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, s);
    const Mat Ap = a_perp_orthogonal(reg.system, reg.orbit, fr, s);
    const Mat A = a_matrix(reg.system, reg.orbit, fr, s);
    Vec v(3);
    v << uniform(-1, 1), uniform(-1, 1), uniform(-1, 1);
    const double lhs = fr.gamma.dot(Ap * v);
    const double rhs =
        -fr.tangent.dot(A.transpose() * v) / fr.tangent.squaredNorm();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("transverse input column") {
  auto reg = circle(1.0);
  for (double s : {0.0, 0.8, 2.2, 4.9}) {
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, s);
    const Mat B = b_perp(reg.system, reg.orbit, fr, s);
    Mat expected(3, 1);
    expected << std::sin(s), std::cos(s), 1.0;
    CHECK((B - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((fr.gamma * B).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Input parallel to the tangent is annihilated.
  ControlAffineSystem tangential = reg.system;
  tangential.g = [](const Vec& x) {
    Mat out(3, 1);
    out << x[1], -x[0], 0.0;
    return out;
  };
  const ProjectionFrame fr = frame_at(tangential, reg.orbit, 0.4);
  CHECK(b_perp(tangential, reg.orbit, fr, 0.4).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sampled transverse linearization matches the closed form") {
  auto reg = circle(1.0);
  const auto tvl = tvl_orthogonal(reg.system, reg.orbit, 128);
  for (long i = 0; i < tvl.s_grid().size(); ++i) {
    const double s = tvl.s_grid()[i];
    CHECK((tvl.A_samples()[static_cast<size_t>(i)] - drift_closed_form(1.0, s))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
  // Interpolation reproduces grid samples.
  CHECK((tvl.A(tvl.s_grid()[13]) - tvl.A_samples()[13]).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("flow-aligned solution of the undriven linearization") {
  auto reg = circle(1.0);
  const auto tvl = tvl_orthogonal(reg.system, reg.orbit, 256);
  // y(s) = x_s'(s) / (x_s'^T f) solves dy/ds = A_perp y / rho.
  auto y_par = [&](double s) {
    const Vec t = orbit_tangent(reg.orbit, s);
    return Vec(t / t.dot(reg.system.f(reg.orbit.xs(s))));
  };
  auto rhs = [&](double s, const Vec& y) {
    return Vec(tvl.A(s) * y / tvl.rho(s));
  };
  const Vec y_end = ode_integrate(rhs, 0.0, 2.0 * M_PI, y_par(0.0));
  CHECK((y_end - y_par(2.0 * M_PI)).norm() < 1e-7);
}

TEST_CASE("constraint stays satisfied along the undriven flow") {
  auto reg = circle(1.0);
  const auto tvl = tvl_orthogonal(reg.system, reg.orbit, 256);
  Vec z0(3);
  z0 << 0.0, 0.3, -0.4;  // in ker Gamma(0)
  auto rhs = [&](double s, const Vec& z) {
    return Vec(tvl.A(s) * z / tvl.rho(s));
  };
  double worst = 0.0;
  Vec z = z0;
  for (int i = 1; i <= 64; ++i) {
    const double s1 = 2.0 * M_PI * i / 64.0;
    z = ode_integrate(rhs, 2.0 * M_PI * (i - 1) / 64.0, s1, std::move(z));
    worst = std::max(worst, (tvl.constraint(s1) * z).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("comparison system matches the closed form") {
  auto reg = circle(1.0);
  const auto comp = comparison_system(reg.system, reg.orbit, 512);
  {
    Mat expected(3, 3);
    expected << 0, 0, 0, -1, 0, 1, 0, 0, 0;
    CHECK((comp.A(0.0) - expected).cwiseAbs().maxCoeff() < 1e-10);
    Mat bexp(3, 1);
    bexp << 0, 1, 1;
    CHECK((comp.B(0.0) - bexp).cwiseAbs().maxCoeff() < 1e-10);
  }
  {
    const double r = std::sqrt(2.0) / 2.0;
    Mat expected(3, 3);
    expected << -0.5, 0.5, r, -0.5, 0.5, r, 0, 0, 0;
    CHECK((comp.A(M_PI_4) - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
  // x_s'(s) solves the undriven comparison system.
  auto rhs = [&](double s, const Vec& y) {
    return Vec(comp.A(s) * y / comp.rho(s));
  };
  const Vec y_end =
      ode_integrate(rhs, 0.0, 2.0 * M_PI, orbit_tangent(reg.orbit, 0.0));
  CHECK((y_end - orbit_tangent(reg.orbit, 0.0)).norm() < 1e-7);
}

TEST_CASE("structured inverse cases") {
  auto reg = circle(1.0);
  const ProjectionFrame fr = frame_at(reg.system, reg.orbit, 0.9);

  // Square case: inverse of the identity.
  CHECK((pi_dagger(Mat::Identity(3, 3), fr) - Mat::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  // Wide-kernel case N = n - 1.
  for (int trial = 0; trial < 20; ++trial) {
    Mat Pi(2, 3);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) Pi(r, c) = uniform(-1, 1);
    Mat Psi = Pi * fr.omega;
    Eigen::JacobiSVD<Mat> svd(Psi);
    if (svd.singularValues().minCoeff() < 1e-3) continue;
    const Mat Pid = pi_dagger(Pi, fr);
    CHECK((Psi * Pid - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fr.gamma * Pid).cwiseAbs().maxCoeff() < 1e-9);
  }

  // Tall case N > n.
  Mat tall(4, 3);
  tall << Mat::Identity(3, 3), RowVec::Zero(3);
  Mat expected(3, 4);
  expected << Mat::Identity(3, 3), Vec::Zero(3);
  CHECK((pi_dagger(tall, fr) - expected).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(pi_dagger(Mat::Zero(2, 3), fr), RankDeficient);
}

TEST_CASE("coordinate validation") {
  auto reg = circle(1.0);
  CHECK(validate_transverse_coords(circle_z_map(reg), reg.system, reg.orbit, 64)
            .pass);
  CHECK(validate_transverse_coords(circle_minimal_map(1.0), reg.system,
                                   reg.orbit, 64)
            .pass);

  // A single scalar coordinate is dimensionally insufficient for n = 3.
  TransverseCoordinateMap scalar;
  scalar.N = 1;
  scalar.y = [&reg](double s, const Vec& x) {
    Vec out(1);
    out << orbit_tangent(reg.orbit, s).dot(x - reg.orbit.xs(s));
    return out;
  };
  CHECK_FALSE(
      validate_transverse_coords(scalar, reg.system, reg.orbit, 16).pass);
}

TEST_CASE("general construction recovers the simplified one") {
  auto reg = circle(1.0);
  const int grid = 192;
  const auto tvl = tvl_orthogonal(reg.system, reg.orbit, grid);
  const auto gen = tvl_general(circle_z_map(reg), reg.system, reg.orbit, grid);
  const Mat M1 = monodromy(tvl);
  const Mat M2 = monodromy(gen);
  const RowVec gamma0 = frame_at(reg.system, reg.orbit, 0.0).gamma;
  const Mat R1 = restrict_to_kernel(M1, gamma0);
  const Mat R2 = restrict_to_kernel(M2, gamma0);
  CHECK((R1 - R2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("general construction on the minimal pair is a double integrator") {
  auto reg = circle(1.0);
  const auto gen =
      tvl_general(circle_minimal_map(1.0), reg.system, reg.orbit, 96);
  Mat expected(2, 2);
  expected << 0, 1, 0, 0;
  for (long i = 0; i < gen.s_grid().size(); ++i) {
    CHECK((gen.A_samples()[static_cast<size_t>(i)] - expected)
              .cwiseAbs()
              .maxCoeff() < 1e-6);
    CHECK(gen.constraint_samples()[static_cast<size_t>(i)]
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
  // Characteristic exponents of the undriven pair are both zero.
  const auto spec = spectrum(monodromy(gen), gen.time_period());
  for (const auto& lam : spec.exponents) CHECK(std::abs(lam.real()) < 1e-6);
}

TEST_CASE("minimal construction gives the normal form directly") {
  auto reg = circle(1.0);
  const auto sys = minimal_tvl(circle_minimal_map(1.0), reg.system, reg.orbit, 96);
  Mat expected(2, 2);
  expected << 0, 1, 0, 0;
  Mat bexp(2, 1);
  bexp << 0, 1;
  for (long i = 0; i < sys.s_grid().size(); ++i) {
    CHECK((sys.A_samples()[static_cast<size_t>(i)] - expected)
              .cwiseAbs()
              .maxCoeff() < 1e-6);
    CHECK((sys.B_samples()[static_cast<size_t>(i)] - bexp)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}

TEST_CASE("minimal construction is invariant under time reparameterization") {
  auto reg = circle(1.0);
  ControlAffineSystem fast = reg.system;
  auto base_f = reg.system.f;
  fast.f = [base_f](const Vec& x) { return Vec(2.0 * base_f(x)); };
  fast.df = nullptr;
  const auto slow = minimal_tvl(circle_minimal_map(1.0), reg.system, reg.orbit, 64);
  const auto quick = minimal_tvl(circle_minimal_map(1.0), fast, reg.orbit, 64);
  // Per-time drift doubles, the parameter speed doubles, and the
  // s-domain drift A/rho is unchanged.
  CHECK((quick.A(1.0) - 2.0 * slow.A(1.0)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(quick.rho(1.0) == doctest::Approx(2.0 * slow.rho(1.0)).epsilon(1e-9));
}

TEST_CASE("phase variation rows for the circle") {
  auto reg = circle(1.0);
  const auto pvs =
      phase_variation_system(reg.system, reg.orbit, circle_z_map(reg), 64);
  for (size_t i = 0; i < pvs.row_u.size(); ++i) {
    CHECK(pvs.row_u[i].cwiseAbs().maxCoeff() < 1e-10);  // Gamma g == 0 here
    CHECK(pvs.row_y[i].allFinite());
  }
}

TEST_CASE("smooth kernel frame of the annihilator") {
  auto reg = circle(1.0);
  const auto frame = transverse_frame(reg.system, reg.orbit, 128);
  CHECK_FALSE(frame.holonomy);
  CHECK(frame.end_mismatch < 1e-6);
  for (size_t i = 0; i < frame.phi.size(); ++i) {
    const double s = frame.s_grid[static_cast<long>(i)];
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, s);
    const Mat& Phi = frame.phi[i];
    CHECK((Phi.transpose() * Phi - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK((fr.gamma * Phi).cwiseAbs().maxCoeff() < 1e-9);
  }
  // At s = 0 the kernel of Gamma = (1, 0, 0) is the (e2, e3) plane.
  CHECK(frame.phi[0].col(0).cwiseAbs()[0] < 1e-9);
  CHECK(frame.phi[0].col(1).cwiseAbs()[0] < 1e-9);
}

TEST_CASE("reduced pair has dimension n - 1") {
  auto reg = circle(1.0);
  const auto frame = transverse_frame(reg.system, reg.orbit, 128);
  const auto red = reduced_pair(reg.system, reg.orbit, frame);
  CHECK(red.state_dim() == 2);
  CHECK(red.input_dim() == 1);
}

TEST_CASE("kernel restriction keeps valid maps injective") {
  auto reg = circle(1.0);
  const auto frame = transverse_frame(reg.system, reg.orbit, 128);
  for (int trial = 0; trial < 50; ++trial) {
    const long idx = static_cast<long>(uniform(0, 127));
    Mat Pi(2, 3);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) Pi(r, c) = uniform(-1, 1);
    Eigen::JacobiSVD<Mat> pre(Pi * frame.phi[static_cast<size_t>(idx)]);
    Eigen::JacobiSVD<Mat> raw(Pi);
    if (raw.singularValues().minCoeff() < 1e-2) continue;
    // Generic full-rank maps stay injective on the kernel except for a
    // measure-zero set; allow the documented floor.
    CHECK(pre.singularValues().minCoeff() > 1e-7);
  }
}

TEST_CASE("differential consistency of the identity map") {
  auto reg = circle(1.0);
  const auto map = circle_z_map(reg);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = uniform(0.0, 2.0 * M_PI);
    const ProjectionFrame fr = frame_at(reg.system, reg.orbit, s);
    Vec dx(3);
    dx << uniform(-1, 1), uniform(-1, 1), uniform(-1, 1);
    dx = fr.omega * dx;  // constraint-satisfying direction
    const Mat Pi = map.dy_dx(s, fr.x_on_orbit);
    // Total derivative: Pi dx + dy/ds * (Gamma dx) with Gamma dx = 0.
    CHECK((Pi * dx - dx).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("parameter derivative matches the tangent relation") {
  auto reg = circle(1.0);
  for (const auto& map : {circle_z_map(reg), circle_minimal_map(1.0)}) {
    for (int i = 0; i < 16; ++i) {
      const double s = 2.0 * M_PI * i / 16.0;
      const Vec xs = reg.orbit.xs(s);
      const Vec lhs = map.dy_ds(s, xs);
      const Vec rhs = -map.dy_dx(s, xs) * orbit_tangent(reg.orbit, s);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("serialization round trip") {
  auto reg = circle(1.0);
  const auto tvl = tvl_orthogonal(reg.system, reg.orbit, 64);
  const auto back = PeriodicLinearSystem::from_json(tvl.to_json());
  for (double s : {0.0, 0.7, 3.3, 6.1}) {
    CHECK((tvl.A(s) - back.A(s)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((tvl.B(s) - back.B(s)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(tvl.rho(s) - back.rho(s)) < 1e-12);
    CHECK((tvl.constraint(s) - back.constraint(s)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}
