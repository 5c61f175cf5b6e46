#include <doctest.h>

#include <sstream>

#include "hexedge/edge.hpp"

using namespace hexedge;

namespace {

StripModel small_model(double eps, int a1, int b1, double delta, int NT) {
  auto [V, W] = builtin_example();
  StripModel m;
  m.frame = edge_frame(a1, b1);
  m.eps = eps;
  m.delta = delta;
  m.V = V;
  m.W = W;
  m.wall = DomainWall::tanh();
  m.NT = NT;
  m.N1 = 4;
  m.P = 3;
  return m;
}

Eigen::VectorXd all_eigenvalues(const MatrixXc& H) { return Eigen::SelfAdjointEigenSolver<MatrixXc>(H, Eigen::EigenvaluesOnly).eigenvalues(); }

}  // namespace

TEST_CASE("supercell sizes") {
  CHECK(supercell_cells(0.1, 16, 12) == 168);
  CHECK(supercell_cells(0.5, 16, 12) == 36);
  CHECK(supercell_cells(0.1, 156, 12) == 1560);
  CHECK_THROWS(supercell_cells(0, 16, 12));
}

TEST_CASE("two-wall profile") {
  auto p = periodicize_wall(DomainWall::tanh(), 0.5, 48);
  CHECK(p.real_odd);
  for (double y : {0.0, 6.0, 12.0, 17.3, 30.0, 47.5}) CHECK(std::abs(p.fourier_eval(y) - p.eval(2 * kPi * 0.5 * y)) < 1e-6);
  CHECK(std::abs(p.eval(p.L / 4)) < 1e-12);
  CHECK(std::abs(p.eval(3 * p.L / 4)) < 1e-12);
  CHECK(std::abs(p.eval(0) + 1) < 1e-12);
  CHECK(std::abs(p.eval(p.L / 2) - 1) < 1e-12);
  auto b = periodicize_wall(DomainWall::tanh_plus_bump(), 0.5, 48);
  CHECK_FALSE(b.real_odd);
  CHECK_THROWS(periodicize_wall(DomainWall::tanh(), 0.5, 24));
  CHECK_THROWS(periodicize_wall(DomainWall::tanh(), 0.5, 49));
}

TEST_CASE("dense strip is Hermitian and symmetric under time reversal") {
  auto m = small_model(10, 1, 0, 1.0, 16);
  MatrixXc H = assemble_strip(m, 2.0);
  CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
  auto e1 = all_eigenvalues(H), e2 = all_eigenvalues(assemble_strip(m, -2.0));
  CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("negating W maps the strip to itself") {
  // inversion takes W to -W and leaves the two-wall profile invariant
  for (auto [a1, b1] : {std::pair{1, 0}, std::pair{1, 1}}) {
    auto m = small_model(10, a1, b1, 1.0, 16);
    auto e1 = all_eigenvalues(assemble_strip(m, 1.3));
    m.W = m.W.scaled(-1);
    auto e2 = all_eigenvalues(assemble_strip(m, 1.3));
    CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("low strip eigenvalues are periodic in kpar") {
  auto m = small_model(-10, 1, 0, 1.0, 16);
  m.N1 = 6;
  auto e1 = all_eigenvalues(assemble_strip(m, 0.4)), e2 = all_eigenvalues(assemble_strip(m, 0.4 + 2 * kPi));
  CHECK((e1.head(40) - e2.head(40)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("reduced strip with every band equals the dense strip on the same plane waves") {
  for (double eps : {10.0, -10.0}) {
    auto m = small_model(eps, 1, 0, 1.0, 16);
    m.full = true;
    const double kp = 2 * kPi / 3;
    ReducedStrip rs(m, kp);
    CHECK(rs.is_real());
    Mat<double> R = rs.real_matrix();
    auto er = Eigen::SelfAdjointEigenSolver<Mat<double>>(R, Eigen::EigenvaluesOnly).eigenvalues();
    const long lo = -16L * m.P - 8, hi = 16L * m.P + 7;
    auto ed = all_eigenvalues(assemble_strip(m, kp, lo, hi));
    REQUIRE(er.size() == ed.size());
    CHECK((er.head(60) - ed.head(60)).cwiseAbs().maxCoeff() < 1e-9);
    auto ec = all_eigenvalues(rs.complex_matrix().selfadjointView<Eigen::Lower>());
    CHECK((ec.head(60) - ed.head(60)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("strip at delta = 0 is the folded bulk") {
  auto m = small_model(10, 1, 0, 0.0, 12);
  m.N1 = 5;
  m.P = 4;
  const double kp = 2 * kPi / 3;
  auto e = all_eigenvalues(assemble_strip(m, kp));
  auto ref = strip_bulk_oracle(m, kp, 3);
  for (int i = 0; i < 24; ++i) CHECK(std::abs(e(i) - ref[i]) < 1e-8);
}

TEST_CASE("transverse density is normalized") {
  auto m = small_model(10, 1, 0, 1.0, 16);
  auto es = edge_spectrum(m, 2 * kPi / 3, [] {
    EdgeOptions o;
    o.nbands = 6;
    o.dense = true;
    return o;
  }());
  REQUIRE(es.states.size() + es.continuum.size() == 6);
  for (const auto* list : {&es.states, &es.continuum})
    for (const auto& s : *list) {
      double sum = 0;
      for (double d : s.density) sum += d;
      CHECK(std::abs(sum - 1) < 1e-10);
      CHECK(s.centroid >= 0);
      CHECK(s.centroid < m.NT);
      CHECK(s.tail_mass >= 0);
      CHECK(s.tail_mass <= 1);
    }
  CHECK(es.max_residual < 1e-8);
}

TEST_CASE("branch tracking follows nearest energies") {
  std::vector<EdgeSpectrum> sweep(3);
  std::vector<double> x = {0, 0.1, 0.2};
  const double E[3][2] = {{1.0, 1.5}, {1.02, 1.47}, {1.04, 1.44}};
  for (int i = 0; i < 3; ++i)
    for (int w = 0; w < 2; ++w) {
      EdgeState s;
      s.energy = E[i][w];
      s.localized = true;
      s.in_gap = true;
      s.wall_index = w;
      s.density = {w == 0 ? 1.0 : 0.0, w == 0 ? 0.0 : 1.0};
      sweep[i].states.push_back(s);
    }
  auto br = track_branches(sweep, x, 0.05);
  REQUIRE(br.size() == 2);
  for (const auto& b : br) {
    CHECK(b.points.size() == 3);
    double expect = b.wall == 0 ? 0.2 : -0.3;
    CHECK(std::abs(b.slope[1] - expect) < 1e-12);
  }
}

TEST_CASE("edge CSV schemas") {
  EdgeSpectrum sp;
  sp.delta = 0.5;
  sp.kpar = 1;
  EdgeState s;
  s.energy = 2;
  s.localized = true;
  s.tail_mass = 1e-3;
  sp.states.push_back(s);
  std::ostringstream a, b;
  write_delta_csv(a, {sp});
  write_kpar_csv(b, {sp}, {});
  CHECK(a.str().rfind("delta,eig_index,energy,localized,centroid,tail_mass\n", 0) == 0);
  CHECK(b.str().rfind("kpar,eig_index,energy,localized,group_velocity\n", 0) == 0);
}
