// Acceptance criteria 1-12: one PASS/FAIL line each, exit status 1 if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "hexedge/edge.hpp"
#include "hexedge/effective.hpp"
#include "hexedge/nofold.hpp"

using namespace hexedge;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ") + what;
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

int failures = 0;
std::set<int> only;  // criteria named on the command line, empty = all

void criterion(int n, const std::function<Verdict()>& body) {
  if (!only.empty() && !only.count(n)) return;
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("exception: ") + e.what();
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("criterion %d: %s (%.1f s) %s\n", n, v.pass ? "PASS" : "FAIL", s, v.detail.c_str());
  std::fflush(stdout);
}

const BuiltinPotentials& pots() {
  static BuiltinPotentials p = builtin_example();
  return p;
}

StripModel strip(double eps, const EdgeFrame& f, double delta, int NT, const DomainWall& w = DomainWall::tanh()) {
  StripModel m;
  m.frame = f;
  m.eps = eps;
  m.delta = delta;
  m.V = pots().V;
  m.W = pots().W;
  m.wall = w;
  m.NT = NT;
  return m;
}

const EdgeState* wall_state(const EdgeSpectrum& sp, int wall, double near) {
  const EdgeState* best = nullptr;
  for (const auto& s : sp.states)
    if (s.localized && s.wall_index == wall && (!best || std::abs(s.energy - near) < std::abs(best->energy - near)))
      best = &s;
  return best;
}

int localized_below(const EdgeSpectrum& sp, double e) {
  int n = 0;
  for (const auto& s : sp.states) n += s.localized && s.energy < e;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Verdict geometry() {
  Verdict v;
  const auto& L = lattice();
  double worst = 0;
  int frames = 0;
  for (int a = -5; a <= 5; ++a)
    for (int b = -5; b <= 5; ++b) {
      if (std::gcd(a, b) != 1) continue;
      EdgeFrame f = edge_frame(a, b);
      const Vec2 vv[2] = {f.v1, f.v2}, K[2] = {f.K1, f.K2};
      for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m) worst = std::max(worst, std::abs(K[l].dot(vv[m]) - (l == m ? 2 * kPi : 0)));
      ++frames;
    }
  v.require(worst < 1e-12, std::to_string(frames) + " frames dual to " + fmt("%.1e", worst));
  v.require((edge_frame(1, 1).K2 - (-L.k1 + L.k2)).norm() < 1e-12, "armchair K2 = -k1 + k2");
  v.require((edge_frame(2, 1).K2 - (-L.k1 + 2 * L.k2)).norm() < 1e-12, "(2,1) K2 = -k1 + 2 k2");
  return v;
}

Verdict v11_oracle() {
  Verdict v;
  auto c = v11_check(pots().V);
  v.require(c.difference < 1e-10, "lookup vs quadrature " + fmt("%.1e", c.difference));
  v.require(std::abs(c.lookup - cplx(0.5)) < 1e-12, "V11 = " + fmt("%.12g", c.lookup.real()));
  return v;
}

Verdict dirac() {
  Verdict v;
  auto c = certify_dirac(10, pots().V, high_symmetry().K3, 8);
  v.require(c.residuals.at("split") < 1e-6, "split " + fmt("%.1e", c.residuals.at("split")));
  v.require(c.bstar == 1, "b* = 1 at eps = 10");
  v.require(c.residuals.at("zeta_spread") < 1e-6, "zeta spread " + fmt("%.1e", c.residuals.at("zeta_spread")));
  v.require(c.residuals.at("fd_slope_rel") < 1e-3, "fd slope rel " + fmt("%.1e", c.residuals.at("fd_slope_rel")));
  auto m = certify_dirac(-10, pots().V, high_symmetry().K3, 8);
  v.require(m.bstar == 2, "b* = 2 at eps = -10");
  v.require(m.residuals.at("split") < 1e-6, "split " + fmt("%.1e", m.residuals.at("split")));
  return v;
}

Verdict gap_opening() {
  Verdict v;
  for (double eps : {10.0, -10.0}) {
    auto c = certify_dirac(eps, pots().V, high_symmetry().K3, 8);
    const double th = std::abs(theta_sharp(c, pots().W));
    for (double sign : {1.0, -1.0}) {
      double g1 = vertex_gap(c, pots().V, pots().W, sign * 1e-3) / 1e-3;
      double g2 = vertex_gap(c, pots().V, pots().W, sign * 2e-3) / 2e-3;
      double rel = std::abs((2 * g1 - g2) / (2 * th) - 1);
      v.require(rel <= 1e-2, std::string(sign > 0 ? "H+" : "H-") + " eps=" + fmt("%g", eps) + " rel " + fmt("%.1e", rel));
    }
  }
  return v;
}

Verdict nofold_table() {
  Verdict v;
  struct Case {
    int a1, b1;
    double eps;
    bool holds;
  };
  for (const Case& k : {Case{1, 0, 10, true}, Case{1, 0, -10, false}, Case{1, 1, -10, false}, Case{1, 1, 1, false},
                        Case{1, 1, 10, true}, Case{2, 1, 10, true}}) {
    auto c = certify_dirac(k.eps, pots().V, high_symmetry().K3, 8);
    EdgeFrame f = edge_frame(k.a1, k.b1);
    auto r = check_nofold(k.eps, 0.5, pots().V, pots().W, 1, f, c.K3, c.Estar, c.bstar + 2);
    v.require(r.holds == k.holds, f.name() + "/eps=" + fmt("%g", k.eps) + (r.holds ? " holds" : " fails"));
  }
  return v;
}

Verdict strip_gate() {
  Verdict v;
  for (auto [a1, b1] : {std::pair{1, 0}, std::pair{1, 1}})
    for (double eps : {-10.0, 10.0}) {
      EdgeFrame f = edge_frame(a1, b1);
      const double kp = kpar_star(f);
      StripModel m = strip(eps, f, 0, 12);
      Eigen::SelfAdjointEigenSolver<MatrixXc> es(assemble_strip(m, kp), Eigen::EigenvaluesOnly);
      auto ref = strip_bulk_oracle(m, kp, 6);
      double dense = 0;
      for (int i = 0; i < 3 * m.NT; ++i) dense = std::max(dense, std::abs(es.eigenvalues()(i) - ref[i]));
      StripModel r = strip(eps, f, 0, 48);
      ReducedStrip rs(r, kp);
      Eigen::SelfAdjointEigenSolver<Mat<cplx>> er(rs.complex_matrix(), Eigen::EigenvaluesOnly);
      auto rref = strip_bulk_oracle(r, kp, 6);
      double red = 0;
      for (int i = 0; i < 3 * r.NT; ++i) red = std::max(red, std::abs(er.eigenvalues()(i) - rref[i]));
      v.require(std::max(dense, red) < 1e-8,
                f.name() + "/eps=" + fmt("%g", eps) + " dense " + fmt("%.1e", dense) + " reduced " + fmt("%.1e", red));
    }
  return v;
}

Verdict protected_branch() {
  Verdict v;
  const EdgeFrame f = edge_frame(1, 0);
  const double kp = 2 * kPi / 3;
  auto c = certify_dirac(10, pots().V, high_symmetry().K3, 8);
  const double th = theta_sharp(c, pots().W);
  auto az = dirac_zero_mode_analytic(dirac_model(c, th, f, DomainWall::tanh()));
  auto alpha2 = [&](double z) { return az(z).squaredNorm(); };
  EdgeOptions o;
  o.eref = c.Estar;
  std::vector<double> dE[2];
  const std::vector<double> deltas = {0.4, 0.2, 0.1};
  for (double d : deltas) {
    const int NT = supercell_cells(d, 156, 12);
    auto sp = edge_spectrum(strip(10, f, d, NT), kp, o);
    const bool one = sp.count_localized(0) == 1 && sp.count_localized(1) == 1;
    v.require(one, "delta " + fmt("%g", d) + " one state per wall");
    for (int w = 0; w < 2; ++w) {
      const EdgeState* s = wall_state(sp, w, c.Estar);
      dE[w].push_back(s ? std::abs(s->energy - c.Estar) : NAN);
      if (w == 0 && s) {
        double corr = envelope_correlation(*s, d, NT, alpha2);
        v.require(corr >= 0.99, "envelope " + fmt("%.6f", corr));
      }
    }
  }
  // wall 0 carries kappa = tanh; the reversed wall 1 realizes delta -> -delta and is reported only
  for (int i = 0; i + 1 < 3; ++i) {
    double ratio = dE[0][i] / dE[0][i + 1];
    v.require(ratio >= 3 && ratio <= 5,
              "ratio " + fmt("%g", deltas[i]) + "/" + fmt("%g", deltas[i + 1]) + " = " + fmt("%.3f", ratio));
  }
  v.detail += "; wall 1 (-delta) ratios " + fmt("%.3f", dE[1][0] / dE[1][1]) + ", " + fmt("%.3f", dE[1][1] / dE[1][2]);
  auto sp = edge_spectrum(strip(10, f, 0.4, supercell_cells(0.4, 156, 12), DomainWall::tanh_plus_odd_bump(3, 4)), kp, o);
  v.require(sp.count_localized(0) == 1 && sp.count_localized(1) == 1,
            "distorted wall keeps one state per wall (E " + fmt("%.8f", wall_state(sp, 0, c.Estar) ? wall_state(sp, 0, c.Estar)->energy : NAN) + ")");
  return v;
}

Verdict zero_mode() {
  Verdict v;
  auto c = certify_dirac(10, pots().V, high_symmetry().K3, 8);
  auto m = dirac_model(c, theta_sharp(c, pots().W), edge_frame(1, 0), DomainWall::tanh());
  auto z = dirac_zero_mode_numeric(m, 20 * m.c / std::abs(m.theta), 20000);
  auto an = dirac_zero_mode_analytic(m);
  std::vector<double> a, b;
  for (size_t i = 0; i < z.zeta.size(); ++i) {
    a.push_back(z.alpha[i].squaredNorm());
    b.push_back(an(z.zeta[i]).squaredNorm());
  }
  double corr = correlation(a, b);
  v.require(z.energy < 1e-6, "|E0| = " + fmt("%.1e", z.energy));
  v.require(corr >= 0.999, "correlation " + fmt("%.8f", corr));
  return v;
}

Verdict schrodinger() {
  Verdict v;
  const EdgeFrame f = edge_frame(1, 0);
  const double kp = 2 * kPi / 3;
  auto sm = schrodinger_coefficients(-10, pots().V, pots().W, high_symmetry().K, f, 8);
  v.require(sm.b > 0, "b = " + fmt("%.10f", sm.b));
  v.require(std::abs(sm.a_imag) < 1e-10, "a real (" + fmt("%.8f", sm.a) + ")");
  v.require(sm.m_eff_inv() < 0, "1/m_eff = " + fmt("%.6f", sm.m_eff_inv()));
  double rel = std::abs(sm.half_inv_mass - sm.half_inv_mass_fd) / std::abs(sm.half_inv_mass);
  v.require(rel <= 1e-4, "resolvent vs Hessian " + fmt("%.1e", rel));
  sm.wall = DomainWall::tanh();
  auto ht = solve_heff_adaptive(sm);
  v.require(ht.states.size() == 1 && ht.states[0].mu > 0, "tanh: one bound state");
  SchrodingerModel nat = sm;
  nat.wall = DomainWall::tanh_plus_bump(10, 50);
  v.require(solve_heff_adaptive(nat).states.empty(), "natural wall: none");
  if (ht.states.size() != 1) return v;
  const double mu = ht.states[0].mu;

  const double Et = sm.E;
  EdgeOptions o;
  o.eref = Et;
  o.window = EdgeWindow::Lower;
  o.halfwidth = 0.3;
  std::vector<double> err;
  for (double d : {0.2, 0.1}) {
    auto sp = edge_spectrum(strip(-10, f, d, supercell_cells(d, 100, 12)), kp, o);
    const double pred = predict_edge_energy(sm, mu, d);
    const EdgeState* s = wall_state(sp, 0, pred);
    v.require(s != nullptr, "tanh strip state at delta " + fmt("%g", d));
    err.push_back(s ? std::abs(s->energy - pred) : NAN);
  }
  // absence: no localized state in the lower half of the gap with the natural wall
  EdgeOptions g;
  g.eref = Et;
  g.window = EdgeWindow::Gap;
  g.margin = 0.01;
  auto sp = edge_spectrum(strip(-10, f, 0.5, supercell_cells(0.5, 100, 12), nat.wall), kp, g);
  auto spt = edge_spectrum(strip(-10, f, 0.5, supercell_cells(0.5, 100, 12)), kp, g);
  const double mid = 0.5 * (sp.gap_lo + sp.gap_hi);
  v.require(sp.has_gap && localized_below(sp, mid) == 0, "natural wall strip: no state in the lower half-gap");
  v.require(spt.has_gap && localized_below(spt, mid) > 0, "tanh strip: state in the lower half-gap");
  double ratio = err[0] / err[1];
  v.require(ratio >= 6 && ratio <= 10, "|E_strip - E_pred| " + fmt("%.2e", err[0]) + ", " + fmt("%.2e", err[1]) +
                                           " halving ratio " + fmt("%.2f", ratio));
  return v;
}

Verdict counterpropagation() {
  Verdict v;
  const EdgeFrame f = edge_frame(1, 1);
  StripModel m = strip(10, f, 5, 72);
  m.bands = 16;
  auto c = certify_dirac(10, pots().V, high_symmetry().K3, 8);
  EdgeOptions o;
  o.eref = c.Estar;
  std::vector<double> ks;
  for (int i = 0; i < 61; ++i) ks.push_back(-kPi + 2 * kPi * i / 60);
  auto sweep = spectrum_vs_kpar(m, ks, o);
  auto br = track_branches(sweep, ks, 0.5);
  // wall-0 branches on the full grid, energy and slope per kpar
  struct Curve { std::vector<double> e, s; };
  std::vector<Curve> cs;
  for (const auto& b : br) {
    if (b.wall != 0) continue;
    Curve cv{std::vector<double>(ks.size(), NAN), std::vector<double>(ks.size(), NAN)};
    for (size_t j = 0; j < b.points.size(); ++j) cv.e[b.points[j].grid] = b.points[j].energy, cv.s[b.points[j].grid] = b.slope[j];
    cs.push_back(cv);
  }
  // the pair that comes closest inside the gap containing E*
  double best = INFINITY;
  size_t p = 0, q = 0, kc = 0;
  for (size_t a = 0; a < cs.size(); ++a)
    for (size_t b = a + 1; b < cs.size(); ++b)
      for (size_t i = 0; i < ks.size(); ++i) {
        const auto& sp = sweep[i];
        if (!sp.has_gap || !(sp.gap_lo < c.Estar && sp.gap_hi > c.Estar)) continue;
        double d = std::abs(cs[a].e[i] - cs[b].e[i]);
        if (d < best) best = d, p = a, q = b, kc = i;
      }
  v.require(std::isfinite(best), std::to_string(cs.size()) + " localized branches on wall 0");
  if (!std::isfinite(best)) return v;
  const Curve &lo = cs[p].e[kc] < cs[q].e[kc] ? cs[p] : cs[q], &hi = cs[p].e[kc] < cs[q].e[kc] ? cs[q] : cs[p];
  // contiguous kpar interval around the closest approach with opposite group velocities;
  // the slopes vanish at kc itself when it is a time-reversal point
  auto opp = [&](size_t i) {
    double s1 = lo.s[i], s2 = hi.s[i];
    if (!std::isfinite(s1) || !std::isfinite(s2)) return false;
    if (i == kc && std::abs(s1) < 1e-6 && std::abs(s2) < 1e-6) return true;
    return s1 * s2 < 0;
  };
  size_t l = kc, r = kc;
  while (l > 0 && opp(l - 1)) --l;
  while (r + 1 < ks.size() && opp(r + 1)) ++r;
  int total = 0, opposite = 0;
  for (size_t i = 0; i < ks.size(); ++i)
    if (std::isfinite(lo.s[i]) && std::isfinite(hi.s[i])) ++total, opposite += opp(i);
  // on that interval the lower branch must reach the lower gap edge at kc and the upper one the upper edge
  double lmin = INFINITY, hmax = -INFINITY;
  for (size_t i = l; i <= r; ++i) lmin = std::min(lmin, lo.e[i]), hmax = std::max(hmax, hi.e[i]);
  const auto& g = sweep[kc];
  v.require(opp(kc) && r > l,
            "opposite group velocities on kpar in [" + fmt("%.3f", ks[l]) + ", " + fmt("%.3f", ks[r]) + "] around closest approach " +
                fmt("%.3f", ks[kc]) + " (separation " + fmt("%.3f", best) + ")");
  v.note("opposite at " + std::to_string(opposite) + "/" + std::to_string(total) + " shared kpar");
  v.require(lmin <= g.gap_lo && hmax >= g.gap_hi,
            "pair spans [" + fmt("%.3f", lmin) + ", " + fmt("%.3f", hmax) + "] across gap [" + fmt("%.3f", g.gap_lo) + ", " +
                fmt("%.3f", g.gap_hi) + "] at closest approach");
  return v;
}

Verdict threshold() {
  Verdict v;
  const EdgeFrame f = edge_frame(1, 1);
  const double kp = kpar_star(f);
  const Vec2 base = kp / (2 * kPi) * f.K1;
  auto g = gap_threshold(1, pots().V, pots().W, 1, f, base, 1, 0, 5, 0.05);
  v.require(g.lo > 0 && g.hi - g.lo <= 0.1, "delta* in [" + fmt("%.6f", g.lo) + ", " + fmt("%.6f", g.hi) + "]");
  EdgeOptions o;
  o.gap_band = 1;
  for (double d : {g.lo - 0.1, g.hi + 0.1}) {
    StripModel m = strip(1, f, d, 216);
    m.bands = 12;
    auto sp = edge_spectrum(m, kp, o);
    int loc = 0;
    for (const auto& s : sp.states) loc += s.localized;
    if (d < g.lo)
      v.require(!sp.has_gap && loc == 0, "no gap or gap state at delta " + fmt("%.3f", d));
    else
      v.require(sp.has_gap && loc > 0, "localized gap states at delta " + fmt("%.3f", d) + " (" + std::to_string(loc) + ")");
  }
  return v;
}

Verdict determinism() {
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / ("hexedge_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path ini = dir / "det.ini";
  std::ofstream(ini) << "[run]\nexperiment = edge\n[model]\neps = 10\ndelta = 0.8, 1.0, 1.2\n[numerics]\nnt_scale = 40\nnlambda = 101\n";
  std::map<std::string, std::string> runs[2];
  for (int t : {1, 2}) {
    const fs::path out = dir / ("t" + std::to_string(t));
    std::string cmd = std::string(HEXEDGE_CLI_PATH) + " run --config " + ini.string() + " --out " + out.string() +
                      " --threads " + std::to_string(t) + " >/dev/null 2>&1";
    int st = std::system(cmd.c_str());
    v.require(WIFEXITED(st) && WEXITSTATUS(st) == 0, "run with " + std::to_string(t) + " threads");
    for (const auto& e : fs::directory_iterator(out))
      if (e.path().extension() == ".csv") runs[t - 1][e.path().filename().string()] = slurp(e.path());
  }
  v.require(!runs[0].empty() && runs[0] == runs[1], std::to_string(runs[0].size()) + " CSV files identical");
  fs::remove_all(dir);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  pin_blas_threads();
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  criterion(1, geometry);
  criterion(2, v11_oracle);
  criterion(3, dirac);
  criterion(4, gap_opening);
  criterion(5, nofold_table);
  criterion(6, strip_gate);
  criterion(7, protected_branch);
  criterion(8, zero_mode);
  criterion(9, schrodinger);
  criterion(10, counterpropagation);
  criterion(11, threshold);
  criterion(12, determinism);
  std::printf("%d of %zu criteria failed\n", failures, only.empty() ? size_t(12) : only.size());
  return failures ? 1 : 0;
}
