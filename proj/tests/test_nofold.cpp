#include <doctest.h>

#include "hexedge/dirac.hpp"
#include "hexedge/nofold.hpp"

using namespace hexedge;

TEST_CASE("interval merging") {
  auto m = merge_intervals({{3, 4}, {0, 1}, {0.5, 2}, {4, 5}});
  REQUIRE(m.size() == 2);
  CHECK(m[0] == std::pair<double, double>{0, 2});
  CHECK(m[1] == std::pair<double, double>{3, 5});
}

TEST_CASE("refined lambda grid contains the slice Dirac points") {
  auto g = refined_lambdas(21, {0.0, 1.0 / 3}, 5, 0.02);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(std::find_if(g.begin(), g.end(), [](double l) { return std::abs(l - 1.0 / 3) < 1e-15; }) != g.end());
  for (double l : g) {
    CHECK(l >= -0.5);
    CHECK(l <= 0.5);
  }
}

TEST_CASE("slice Dirac points") {
  auto zz = slice_dirac_points(edge_frame(1, 0), high_symmetry().K3);
  REQUIRE(zz.size() == 1);
  CHECK(zz[0].lambda == 0);
  auto ac = slice_dirac_points(edge_frame(1, 1), high_symmetry().K3);
  CHECK(ac.size() >= 2);
}

TEST_CASE("H+ and H- give the same slice spectrum") {
  auto [V, W] = builtin_example();
  auto c = certify_dirac(10, V, high_symmetry().K3, 8);
  NoFoldOptions o;
  o.nlambda = 41;
  o.nrefine = 11;
  auto r = check_nofold(10, 0.5, V, W, 1, edge_frame(1, 0), c.K3, c.Estar, 3, o);
  auto p = band_intervals(r.plus), m = band_intervals(r.minus);
  REQUIRE(p.size() == m.size());
  for (size_t i = 0; i < p.size(); ++i) {
    CHECK(std::abs(p[i].first - m[i].first) < 1e-9);
    CHECK(std::abs(p[i].second - m[i].second) < 1e-9);
  }
  CHECK(r.has_gap);
  CHECK(r.gap_lo < c.Estar);
  CHECK(r.gap_hi > c.Estar);
}

TEST_CASE("the gap at E* closes as delta goes to zero") {
  auto [V, W] = builtin_example();
  auto c = certify_dirac(10, V, high_symmetry().K3, 8);
  const double th = std::abs(theta_sharp(c, W));
  NoFoldOptions o;
  o.nlambda = 41;
  o.nrefine = 21;
  double prev = INFINITY;
  for (double d : {0.2, 0.05, 0.01}) {
    auto r = check_nofold(10, d, V, W, 1, edge_frame(1, 0), c.K3, c.Estar, 3, o);
    REQUIRE(r.has_gap);
    double w = r.gap_hi - r.gap_lo;
    CHECK(w <= 2 * d * th * (1 + 1e-3));
    CHECK(w < prev);
    prev = w;
  }
  // at delta = 0 bands 1 and 2 touch at E*
  auto rg = slice_band_ranges(10, 0, V, W, 1, edge_frame(1, 0), high_symmetry().K, 2, 41);
  CHECK(rg[0].second >= c.Estar - 1e-9);
  CHECK(rg[1].first <= c.Estar + 1e-9);
}

TEST_CASE("slice band ranges bracket the grid extrema") {
  auto [V, W] = builtin_example();
  const EdgeFrame f = edge_frame(1, 1);
  auto rg = slice_band_ranges(1, 4, V, W, 1, f, Vec2::Zero(), 2, 41);
  SliceOptions so;
  so.W = &W;
  so.w_scale = 4;
  auto s = band_slice(1, V, f, Vec2::Zero(), 41, 2, so);
  for (int b = 0; b < 2; ++b)
    for (const auto& e : s.energies) {
      CHECK(e[b] >= rg[b].first - 1e-9);
      CHECK(e[b] <= rg[b].second + 1e-9);
    }
  CHECK(slice_gap_width(1, 0, V, W, 1, f, Vec2::Zero(), 1, 41) < 0);
}
