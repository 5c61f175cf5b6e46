#include <doctest.h>

#include "hexedge/dirac.hpp"

using namespace hexedge;

// reference values at N = 8 computed with this code and checked against the degenerate
// perturbation and finite-difference oracles below
TEST_CASE("certificate at eps = 10") {
  auto [V, W] = builtin_example();
  auto c = certify_dirac(10, V, high_symmetry().K3, 8);
  CHECK(c.bstar == 1);
  CHECK(c.Estar == doctest::Approx(11.7171677308).epsilon(1e-10));
  CHECK(c.residuals.at("split") < 1e-6);
  CHECK(c.lambda_sharp == doctest::Approx(4.12632646).epsilon(1e-8));
  CHECK(c.residuals.at("zeta_spread") < 1e-6);
  CHECK(c.residuals.at("fd_slope_rel") < 1e-3);
  CHECK(c.residuals.at("conjugate_pair") < 1e-12);
  CHECK(c.residuals.at("orthonormality") < 1e-12);
  CHECK(theta_sharp(c, W) == doctest::Approx(-0.33749669).epsilon(1e-7));
}

TEST_CASE("certificate at eps = -10 sits on bands 2 and 3") {
  auto V = builtin_example().V;
  auto c = certify_dirac(-10, V, high_symmetry().K3, 8);
  CHECK(c.bstar == 2);
  CHECK(c.Estar == doctest::Approx(21.4467816691).epsilon(1e-10));
  auto c1 = certify_dirac(1, V, high_symmetry().K3, 8);
  CHECK(c1.Estar == doctest::Approx(17.0365984010).epsilon(1e-10));
}

TEST_CASE("certificates agree on the rotation orbit of K") {
  auto V = builtin_example().V;
  auto c0 = certify_dirac(10, V, high_symmetry().K3, 8);
  Third p = high_symmetry().K3;
  for (int t = 0; t < 2; ++t) {
    p = rotate(p);
    auto c = certify_dirac(10, V, p, 8);
    CHECK(std::abs(c.Estar - c0.Estar) < 1e-8);
    CHECK(std::abs(c.lambda_sharp - c0.lambda_sharp) < 1e-8);
  }
}

TEST_CASE("bands are conical near K") {
  auto V = builtin_example().V;
  auto c = certify_dirac(10, V, high_symmetry().K3, 8);
  Vec2 dir = edge_frame(1, 0).K2;
  for (double l : {1e-3, -1e-3, 2e-3, -2e-3}) {
    auto [lo, hi] = cone_pair(c, V, dir, l);
    double expect = c.lambda_sharp * std::abs(l) * dir.norm();
    CHECK(std::abs((hi - c.Estar) / expect - 1) < 2e-2);
    CHECK(std::abs((c.Estar - lo) / expect - 1) < 2e-2);
  }
}

TEST_CASE("theta does not depend on the phase of Phi1") {
  auto [V, W] = builtin_example();
  auto c = certify_dirac(10, V, high_symmetry().K3, 8);
  double t0 = theta_sharp(c, W);
  c.Phi1 *= std::polar(1.0, 0.83);
  CHECK(std::abs(theta_sharp(c, W) - t0) < 1e-14);
}

TEST_CASE("odd perturbation opens a gap 2 s |theta|") {
  auto [V, W] = builtin_example();
  for (double eps : {10.0, -10.0}) {
    auto c = certify_dirac(eps, V, high_symmetry().K3, 8);
    double th = std::abs(theta_sharp(c, W));
    double g1 = vertex_gap(c, V, W, 1e-3) / 1e-3, g2 = vertex_gap(c, V, W, 2e-3) / 2e-3;
    double rich = 2 * g1 - g2;
    CHECK(std::abs(rich / (2 * th) - 1) < 1e-2);
    CHECK(vertex_gap(c, V, W, 0) < 1e-6);
  }
}

TEST_CASE("non-vertex quasimomentum is rejected") {
  auto V = builtin_example().V;
  CHECK_THROWS(certify_dirac(10, V, Third{1, 0}, 8));
}
