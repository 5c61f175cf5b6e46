#include <doctest.h>

#include "hexedge/effective.hpp"

using namespace hexedge;

namespace {

DiracModel model10(const DomainWall& w) {
  auto [V, W] = builtin_example();
  auto c = certify_dirac(10, V, high_symmetry().K3, 8);
  return dirac_model(c, theta_sharp(c, W), edge_frame(1, 0), w);
}

SchrodingerModel tamm(const DomainWall& w) {
  auto [V, W] = builtin_example();
  auto m = schrodinger_coefficients(-10, V, W, high_symmetry().K, edge_frame(1, 0), 8);
  m.wall = w;
  return m;
}

}  // namespace

TEST_CASE("Dirac model velocity") {
  auto m = model10(DomainWall::tanh());
  CHECK(m.c > 0);
  CHECK(m.c == doctest::Approx(4.12632646 * edge_frame(1, 0).K2.norm()).epsilon(1e-8));
}

TEST_CASE("Dirac zero mode matches the sech profile") {
  auto m = model10(DomainWall::tanh());
  auto an = dirac_zero_mode_analytic(m);
  CHECK(an.p == doctest::Approx(std::abs(m.theta) / m.c).epsilon(1e-12));
  auto z = dirac_zero_mode_numeric(m, 20 * m.c / std::abs(m.theta), 20000);
  CHECK(z.energy < 1e-6);
  CHECK(z.separated);
  std::vector<double> a, b;
  for (size_t i = 0; i < z.zeta.size(); ++i) {
    a.push_back(z.alpha[i].squaredNorm());
    b.push_back(an(z.zeta[i]).squaredNorm());
  }
  CHECK(correlation(a, b) >= 0.999);
  // the analytic mode solves D alpha = 0: the stencil residual falls at fourth order
  auto residual = [&](double h) {
    std::vector<Eigen::Vector2cd> ex;
    for (int j = 0; j * h <= 200; ++j) ex.push_back(an(-100 + j * h));
    return dirac_residual(m, ex, -100, h);
  };
  const double r1 = residual(0.5), r2 = residual(0.25);
  CHECK(r1 / r2 > 12);
  CHECK(r2 < 2e-5);
}

TEST_CASE("Dirac zero mode survives a localized odd distortion") {
  for (auto w : {DomainWall::tanh_plus_odd_bump(3, 4), DomainWall::tanh_plus_odd_bump(10, 50)}) {
    auto m = model10(w);
    auto z = dirac_zero_mode_numeric(m, 20 * m.c / std::abs(m.theta), 20000);
    CHECK(z.energy < 1e-6);
  }
}

TEST_CASE("effective Schrodinger coefficients at eps = -10") {
  auto m = tamm(DomainWall::tanh());
  CHECK(m.E == doctest::Approx(5.3937238488).epsilon(1e-10));
  CHECK(m.b > 0);
  CHECK(m.b == doctest::Approx(0.0628339479).epsilon(1e-8));
  CHECK(std::abs(m.a_imag) < 1e-10);
  CHECK(m.a == doctest::Approx(1.29788171).epsilon(1e-7));
  CHECK(m.m_eff_inv() < 0);
  CHECK(m.half_inv_mass == doctest::Approx(-69.829905).epsilon(1e-7));
  CHECK(std::abs(m.half_inv_mass - m.half_inv_mass_fd) <= 1e-4 * std::abs(m.half_inv_mass));
  CHECK(std::abs(m.inner_W) < 1e-9);
  CHECK(std::abs(m.inner_grad) < 1e-9);
}

TEST_CASE("one bound state with tanh, none with the natural wall") {
  auto m = tamm(DomainWall::tanh());
  auto r = solve_heff_adaptive(m);
  REQUIRE(r.states.size() == 1);
  CHECK(r.states[0].mu > 0);
  CHECK(r.states[0].mu == doctest::Approx(0.02552953).epsilon(1e-6));
  CHECK(r.states[0].tail_mass < 1e-4);
  CHECK(predict_edge_energy(m, r.states[0].mu, 0.1) == doctest::Approx(5.393350805).epsilon(1e-9));
  CHECK(solve_heff_adaptive(tamm(DomainWall::tanh_plus_bump(10, 50))).states.empty());
}

TEST_CASE("bound state disappears along the bump homotopy") {
  auto h = homotopy_threshold(tamm(DomainWall::tanh()), 10, 50, 1e-3);
  REQUIRE(h.found);
  CHECK(h.theta_hi - h.theta_lo <= 1e-3);
  CHECK(h.theta_lo >= 0.362);
  CHECK(h.theta_hi <= 0.3635);
}

TEST_CASE("deflated resolvent inverts on the complement") {
  auto V = builtin_example().V;
  auto e = lowest_band_edge(-10, V, high_symmetry().K, 8);
  VectorXc f = VectorXc::Random(e.phi.size());
  f -= e.phi * e.phi.dot(f);
  VectorXc u = resolvent_apply(e, f);
  CHECK(std::abs(e.phi.dot(u)) < 1e-10);
  CHECK(((e.H - e.E * MatrixXc::Identity(e.H.rows(), e.H.cols())) * u - f).norm() < 1e-9 * f.norm());
}
