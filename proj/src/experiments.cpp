#include "hexedge/experiments.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hexedge/dirac.hpp"
#include "hexedge/edge.hpp"
#include "hexedge/effective.hpp"
#include "hexedge/nofold.hpp"

namespace hexedge {

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> cat = {
      {"fig2-top", "Fig. 2 top: zigzag spectra vs delta at eps=10, kpar=2pi/3; protected branch from E*"},
      {"fig2-bottom", "Fig. 2 bottom: zigzag spectra vs delta at eps=-10, kpar=2pi/3; branch from the first band edge"},
      {"fig3", "Fig. 3: slices K + lambda K2 at delta=0 and delta>0 (zigzag eps=+-10, armchair eps=-10); no-fold test"},
      {"fig4-top", "Fig. 4 top: zigzag spectra vs kpar at eps=10"},
      {"fig4-bottom", "Fig. 4 bottom: zigzag spectra vs kpar at eps=-10"},
      {"fig5", "Fig. 5: lowest three dispersion surfaces of -Laplacian + 10 V over the Brillouin zone"},
      {"fig6", "Fig. 6: eps=-10 zigzag spectra vs delta for tanh and tanh + 10 exp(-z^2/50), with Q_eff insets"},
      {"fig7", "Fig. 7: no-fold slices for eps in {-10, 1, 10} on the armchair and (2,1) edges"},
      {"fig8", "Fig. 8: armchair spectra vs kpar at eps=10, delta=5; two counterpropagating branches"},
      {"bulk", "band slice through K along K2 and dispersion surfaces (eps, edge, N)"},
      {"dirac", "Dirac point certificate at K: E*, b*, |lambda#|, theta#, residuals"},
      {"nofold", "no-fold check of H+ and H- on the edge slice through K"},
      {"edge", "strip spectra vs delta (or vs kpar when kpar is a grid) with localization data"},
      {"effective", "effective Dirac model and zero mode; effective Schrodinger model and bound states"},
      {"threshold", "delta* at which the slice gap above band 1 opens, with strip checks on both sides"},
  };
  return cat;
}

const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& e : experiment_catalog())
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  const RunConfig& cfg;
  fs::path out;
  std::ostream* log;
  FourierPotential V, W;
  std::vector<std::string> files;
  json resolved = json::object();
  json summary = json::object();

  bool has(const char* k) const { return cfg.given.count(k) > 0; }
  void say(const std::string& s) const {
    if (log) *log << s << std::endl;
  }
  template <class F>
  void write(const std::string& name, F&& f) {
    std::ofstream os(out / name, std::ios::binary);
    if (!os) throw InputError("cannot write " + (out / name).string());
    f(os);
    if (!os) throw std::runtime_error("write failed: " + (out / name).string());
    files.push_back(name);
  }
  void write_json(const std::string& name, const json& j) {
    write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }

  // figure defaults, overridden by keys present in the config
  double eps(double d) const { return has("model.eps") ? cfg.eps : d; }
  EdgeFrame frame(int a1, int b1) const {
    return has("model.edge") ? edge_frame(cfg.a1, cfg.b1) : edge_frame(a1, b1);
  }
  DomainWall wall(const std::string& d) const {
    RunConfig c = cfg;
    if (!has("model.wall")) c.wall = d;
    return c.wall_spec();
  }
  std::vector<double> deltas(std::vector<double> d) const { return has("model.delta") ? cfg.delta : d; }
  std::vector<double> kpars(std::vector<double> d) const { return has("model.kpar") ? cfg.kpar : d; }
};

double parse_number(const std::string& s, const std::string& what) {
  size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw InputError(what + ": cannot parse '" + s + "'");
  return x;
}

// one sweep of strip spectra; everything a figure needs to vary
struct StripSpec {
  double eps = 10;
  EdgeFrame frame;
  DomainWall wall;
  std::string eref = "estar";
  EdgeWindow window = EdgeWindow::Gap;
  double halfwidth = 0.2;
  double nt_scale = 156;
  int NT = 0;
  int bands = 8;
  double max_jump = 0.05;
};

StripSpec strip_spec(const Run& r, StripSpec d) {
  const RunConfig& c = r.cfg;
  if (!c.eref.empty()) d.eref = c.eref;
  if (c.window == "gap") d.window = EdgeWindow::Gap;
  if (c.window == "local") d.window = EdgeWindow::Local;
  if (c.halfwidth > 0) d.halfwidth = c.halfwidth;
  if (c.nt_scale > 0) d.nt_scale = c.nt_scale;
  if (c.NT > 0) d.NT = c.NT;
  if (r.has("numerics.bands")) d.bands = c.bands;
  if (r.has("numerics.max_jump")) d.max_jump = c.max_jump;
  return d;
}

const char* window_name(EdgeWindow w) {
  switch (w) {
    case EdgeWindow::Gap: return "gap";
    case EdgeWindow::Local: return "local";
    case EdgeWindow::Lower: return "lower";
    case EdgeWindow::Upper: return "upper";
  }
  return "";
}

int cells_for(const Run& r, const StripSpec& s, double delta) {
  if (s.NT > 0) return s.NT;
  if (delta == 0) return 4 * r.cfg.nt_multiple;
  return supercell_cells(std::abs(delta), s.nt_scale, r.cfg.nt_multiple);
}

StripModel strip_model(const Run& r, const StripSpec& s, double delta) {
  StripModel m;
  m.frame = s.frame;
  m.eps = s.eps;
  m.delta = delta;
  m.V = r.V;
  m.W = r.W;
  m.wall = s.wall;
  m.NT = cells_for(r, s, delta);
  m.N1 = r.cfg.N1;
  m.P = r.cfg.P;
  m.bands = s.bands;
  m.enrich = r.cfg.enrich;
  m.full = r.cfg.full;
  return m;
}

double resolve_eref(Run& r, const StripSpec& s, double kpar) {
  if (s.eref == "estar") {
    auto cert = certify_dirac(s.eps, r.V, high_symmetry().K3, r.cfg.N);
    return cert.Estar;
  }
  if (s.eref.rfind("band_max:", 0) == 0) {
    int b = static_cast<int>(parse_number(s.eref.substr(9), "numerics.eref"));
    if (b < 1) throw InputError("numerics.eref: band index is 1-based");
    auto rg = slice_band_ranges(s.eps, 0, r.V, r.W, s.wall.kappa_inf, s.frame, kpar / (2 * kPi) * s.frame.K1, b,
                                r.cfg.nlambda, r.cfg.N, r.cfg.threads);
    return rg[b - 1].second;
  }
  return parse_number(s.eref, "numerics.eref");
}

EdgeOptions edge_options(const Run& r, const StripSpec& s, double eref, int threads) {
  EdgeOptions o;
  o.eref = eref;
  o.window = s.window;
  o.halfwidth = s.halfwidth;
  o.margin = r.cfg.margin;
  if (r.cfg.emin < r.cfg.emax) {
    o.emin = r.cfg.emin;
    o.emax = r.cfg.emax;
  }
  o.bulk_bands = r.cfg.bulk_bands;
  o.nlambda = r.cfg.nlambda;
  o.bulk_N = r.cfg.N;
  o.tail_threshold = r.cfg.tail_threshold;
  o.dense_limit = r.cfg.dense_limit;
  o.threads = threads;
  o.seed = r.cfg.seed;
  return o;
}

json spec_json(const StripSpec& s, double eref) {
  return {{"eps", s.eps},
          {"edge", {s.frame.a1, s.frame.b1}},
          {"wall", s.wall.to_text()},
          {"eref", s.eref},
          {"eref_value", eref},
          {"window", window_name(s.window)},
          {"halfwidth", s.halfwidth},
          {"nt_scale", s.nt_scale},
          {"NT", s.NT},
          {"bands", s.bands},
          {"max_jump", s.max_jump}};
}

json point_json(const EdgeSpectrum& sp) {
  json loc = json::array();
  for (const auto& st : sp.states)
    if (st.localized) loc.push_back({{"energy", st.energy}, {"wall", st.wall_index}, {"tail_mass", st.tail_mass}});
  json j = {{"delta", sp.delta},         {"kpar", sp.kpar},
            {"NT", sp.NT},               {"dim", sp.dim},
            {"route", sp.route},         {"window", {sp.emin, sp.emax}},
            {"has_gap", sp.has_gap},     {"max_residual", sp.max_residual},
            {"localized", loc}};
  if (sp.has_gap) j["gap"] = {sp.gap_lo, sp.gap_hi};
  return j;
}

void delta_sweep(Run& r, const StripSpec& s, double kpar, const std::vector<double>& deltas, const std::string& tag) {
  const double eref = resolve_eref(r, s, kpar);
  const int outer = std::min<int>(r.cfg.threads, static_cast<int>(deltas.size()));
  EdgeOptions o = edge_options(r, s, eref, outer > 1 ? 1 : r.cfg.threads);
  r.say("strip sweep over " + std::to_string(deltas.size()) + " delta values" + (tag.empty() ? "" : " (" + tag + ")"));
  auto sweep = spectrum_vs_delta([&](double d) { return strip_model(r, s, d); }, kpar, deltas, o, outer);
  auto br = track_branches(sweep, deltas, s.max_jump);
  const std::string sfx = tag.empty() ? "" : "_" + tag;
  r.write("edge_delta" + sfx + ".csv", [&](std::ostream& os) { write_delta_csv(os, sweep); });
  r.write("branches_delta" + sfx + ".csv", [&](std::ostream& os) { write_branches_csv(os, br, "delta"); });
  json pts = json::array();
  for (const auto& sp : sweep) pts.push_back(point_json(sp));
  json model = strip_json(strip_model(r, s, deltas.back()));
  model.erase("delta");
  model.erase("NT");
  model.erase("N2");
  r.resolved["strip" + sfx] = {{"spec", spec_json(s, eref)}, {"kpar", kpar}, {"model", model}};
  r.summary["points" + sfx] = pts;
  r.summary["branches" + sfx] = br.size();
}

void kpar_sweep(Run& r, const StripSpec& s, double delta, const std::vector<double>& kpars, const std::string& tag) {
  const double eref = resolve_eref(r, s, kpar_star(s.frame));
  const int outer = std::min<int>(r.cfg.threads, static_cast<int>(kpars.size()));
  EdgeOptions o = edge_options(r, s, eref, outer > 1 ? 1 : r.cfg.threads);
  StripModel m = strip_model(r, s, delta);
  r.say("strip sweep over " + std::to_string(kpars.size()) + " kpar values, NT = " + std::to_string(m.NT));
  auto sweep = spectrum_vs_kpar(m, kpars, o, outer);
  auto br = track_branches(sweep, kpars, s.max_jump);
  const std::string sfx = tag.empty() ? "" : "_" + tag;
  r.write("edge_kpar" + sfx + ".csv", [&](std::ostream& os) { write_kpar_csv(os, sweep, br); });
  r.write("branches_kpar" + sfx + ".csv", [&](std::ostream& os) { write_branches_csv(os, br, "kpar"); });
  json pts = json::array();
  for (const auto& sp : sweep) pts.push_back(point_json(sp));
  r.resolved["strip" + sfx] = {{"spec", spec_json(s, eref)}, {"delta", delta}, {"model", strip_json(m)}};
  r.summary["points" + sfx] = pts;
  json bj = json::array();
  for (const auto& b : br) {
    double vmin = INFINITY, vmax = -INFINITY;
    for (double v : b.slope)
      if (std::isfinite(v)) vmin = std::min(vmin, v), vmax = std::max(vmax, v);
    bj.push_back({{"wall", b.wall},
                  {"points", b.points.size()},
                  {"kpar_range", {b.points.front().x, b.points.back().x}},
                  {"group_velocity_range", {std::isfinite(vmin) ? json(vmin) : json(), std::isfinite(vmax) ? json(vmax) : json()}}});
  }
  r.summary["branches" + sfx] = bj;
}

json nofold_panel(Run& r, double eps, const EdgeFrame& f, double delta, const std::string& name) {
  auto cert = certify_dirac(eps, r.V, high_symmetry().K3, r.cfg.N);
  NoFoldOptions o;
  o.nlambda = r.cfg.nlambda;
  o.N = r.cfg.N;
  o.threads = r.cfg.threads;
  auto rep = check_nofold(eps, delta, r.V, r.W, 1.0, f, cert.K3, cert.Estar, cert.bstar + 2, o);
  r.write(name + ".csv", [&](std::ostream& os) { write_nofold_csv(os, rep); });
  return nofold_json(rep);
}

void slice_panel(Run& r, double eps, const EdgeFrame& f, int nbands, const std::string& name) {
  SliceOptions so;
  so.N = r.cfg.N;
  so.threads = r.cfg.threads;
  auto sl = band_slice(eps, r.V, f, high_symmetry().K, r.cfg.nlambda, nbands, so);
  r.write(name + ".csv", [&](std::ostream& os) { write_slice_csv(os, sl); });
}

std::string num_tag(double x) {
  std::ostringstream s;
  s << x;
  std::string t = s.str();
  for (auto& ch : t)
    if (ch == '-') ch = 'm';
    else if (ch == '.') ch = 'p';
  return t;
}

std::string edge_tag(const EdgeFrame& f) {
  if (f.a1 == 1 && f.b1 == 0) return "zigzag";
  if (f.a1 == 1 && f.b1 == 1) return "armchair";
  return "edge" + num_tag(f.a1) + "_" + num_tag(f.b1);
}

void run_effective(Run& r, double eps, const EdgeFrame& f, const DomainWall& wall, const std::vector<double>& deltas,
                   const std::string& tag, bool dirac) {
  const std::string sfx = tag.empty() ? "" : "_" + tag;
  if (dirac) {
    auto cert = certify_dirac(eps, r.V, high_symmetry().K3, r.cfg.N);
    double th = theta_sharp(cert, r.W);
    auto dm = dirac_model(cert, th, f, wall);
    const double L = 20 * dm.c / std::abs(th);
    auto z = dirac_zero_mode_numeric(dm, L, 20000);
    json j = dirac_model_json(dm, z);
    const bool tanh_wall = wall.kind == WallKind::Tanh;
    std::vector<double> num, ana;
    DiracZeroModeAnalytic an;
    if (tanh_wall) an = dirac_zero_mode_analytic(dm);
    for (size_t i = 0; i < z.zeta.size(); ++i) {
      num.push_back(z.alpha[i].squaredNorm());
      if (tanh_wall) ana.push_back(an(z.zeta[i]).squaredNorm());
    }
    if (tanh_wall) j["analytic_correlation"] = correlation(num, ana);
    r.write_json("dirac_model" + sfx + ".json", j);
    r.write("dirac_zero_mode" + sfx + ".csv", [&](std::ostream& os) {
      os << "zeta,density" << (tanh_wall ? ",density_analytic" : "") << '\n';
      for (size_t i = 0; i < z.zeta.size(); i += 10) {
        os << fmt12(z.zeta[i]) << ',' << fmt12(num[i]);
        if (tanh_wall) os << ',' << fmt12(ana[i]);
        os << '\n';
      }
    });
    r.summary["dirac" + sfx] = {{"E0", z.energy}, {"theta", th}, {"c", dm.c}};
    return;
  }
  auto sm = schrodinger_coefficients(eps, r.V, r.W, high_symmetry().K, f, r.cfg.N);
  sm.wall = wall;
  auto hr = solve_heff_adaptive(sm, r.cfg.heff_h);
  json j = schrodinger_json(sm, hr);
  json pred = json::array();
  for (const auto& st : hr.states)
    for (double d : deltas) pred.push_back({{"mu", st.mu}, {"delta", d}, {"E_pred", predict_edge_energy(sm, st.mu, d)}});
  j["predictions"] = pred;
  r.write_json("schrodinger" + sfx + ".json", j);
  r.write("heff" + sfx + ".csv", [&](std::ostream& os) { write_heff_csv(os, sm, hr); });
  json mus = json::array();
  for (const auto& st : hr.states) mus.push_back(st.mu);
  r.summary["schrodinger" + sfx] = {{"mu", mus}, {"L", hr.L}, {"b", sm.b}, {"a", sm.a}, {"m_eff_inv", sm.m_eff_inv()}};
}

std::vector<double> default_delta_grid() { return parse_grid("0:2:0.1"); }

void dispatch(Run& r) {
  const RunConfig& c = r.cfg;
  const std::string& e = c.experiment;
  const double kstar_zz = kpar_star(edge_frame(1, 0));

  if (e == "fig2-top" || e == "fig2-bottom") {
    const bool top = e == "fig2-top";
    StripSpec d;
    d.eps = r.eps(top ? 10 : -10);
    d.frame = r.frame(1, 0);
    d.wall = r.wall("tanh");
    d.eref = top ? "estar" : "band_max:1";
    d.window = top ? EdgeWindow::Gap : EdgeWindow::Lower;
    d.halfwidth = top ? 0.2 : 0.3;
    d.nt_scale = top ? 156 : 100;
    auto s = strip_spec(r, d);
    delta_sweep(r, s, r.kpars({kstar_zz})[0], r.deltas(default_delta_grid()), "");
  } else if (e == "fig3") {
    const double delta = r.deltas({0.5})[0];
    json panels = json::array();
    for (auto [eps, a1, b1] : {std::tuple{10.0, 1, 0}, std::tuple{-10.0, 1, 0}, std::tuple{-10.0, 1, 1}}) {
      EdgeFrame f = edge_frame(a1, b1);
      std::string base = "fig3_" + edge_tag(f) + "_eps" + num_tag(eps);
      slice_panel(r, eps, f, c.slice_bands, base + "_delta0");
      json j = nofold_panel(r, eps, f, delta, base + "_delta" + num_tag(delta));
      panels.push_back(j);
    }
    r.summary["panels"] = panels;
  } else if (e == "fig4-top" || e == "fig4-bottom") {
    const bool top = e == "fig4-top";
    StripSpec d;
    d.eps = r.eps(top ? 10 : -10);
    d.frame = r.frame(1, 0);
    d.wall = r.wall("tanh");
    d.eref = top ? "estar" : "band_max:1";
    d.window = EdgeWindow::Local;
    d.halfwidth = 1.0;
    d.nt_scale = top ? 156 : 100;
    d.max_jump = 0.3;
    auto s = strip_spec(r, d);
    kpar_sweep(r, s, r.deltas({1.0})[0], r.kpars(parse_grid("period 61")), "");
  } else if (e == "fig5" || e == "bulk") {
    const double eps = r.eps(10);
    const int nb = e == "fig5" && !r.has("numerics.slice_bands") ? 3 : c.slice_bands;
    auto surf = dispersion_surface(eps, r.V, bz_grid(c.surface_grid), nb, c.N, c.threads);
    r.write("surface.csv", [&](std::ostream& os) { write_surface_csv(os, surf); });
    if (e == "bulk") slice_panel(r, eps, r.frame(1, 0), nb, "slice");
    r.resolved["bulk"] = {{"eps", eps}, {"bands", nb}, {"surface_grid", c.surface_grid}};
  } else if (e == "fig6") {
    StripSpec d;
    d.eps = r.eps(-10);
    d.frame = r.frame(1, 0);
    d.eref = "band_max:1";
    d.window = EdgeWindow::Lower;
    d.halfwidth = 0.3;
    d.nt_scale = 100;
    const auto deltas = r.deltas(default_delta_grid());
    const double kp = r.kpars({kstar_zz})[0];
    for (auto [tag, w] : {std::pair{"tanh", "tanh"}, std::pair{"natural", "tanh_plus_bump 10 50"}}) {
      d.wall = DomainWall::from_text(w);
      auto s = strip_spec(r, d);
      delta_sweep(r, s, kp, deltas, tag);
      run_effective(r, d.eps, d.frame, d.wall, deltas, tag, false);
    }
  } else if (e == "fig7") {
    const double delta = r.deltas({0.5})[0];
    json panels = json::array();
    for (auto [a1, b1] : {std::pair{1, 1}, std::pair{2, 1}})
      for (double eps : {-10.0, 1.0, 10.0}) {
        EdgeFrame f = edge_frame(a1, b1);
        panels.push_back(nofold_panel(r, eps, f, delta, "fig7_" + edge_tag(f) + "_eps" + num_tag(eps)));
      }
    r.summary["panels"] = panels;
  } else if (e == "fig8") {
    StripSpec d;
    d.eps = r.eps(10);
    d.frame = r.frame(1, 1);
    d.wall = r.wall("tanh");
    d.eref = "estar";
    d.window = EdgeWindow::Gap;
    d.NT = 72;
    d.bands = 16;
    d.max_jump = 0.5;
    auto s = strip_spec(r, d);
    kpar_sweep(r, s, r.deltas({5.0})[0], r.kpars(parse_grid("period 61")), "");
  } else if (e == "dirac") {
    const double eps = r.eps(10);
    auto cert = certify_dirac(eps, r.V, high_symmetry().K3, c.N);
    bool weak = false;
    double th = theta_sharp(cert, r.W, &weak);
    json j = certificate_json(cert);
    j["theta_sharp"] = th;
    j["theta_weak"] = weak;
    j["v11"] = v11(r.V).real();
    r.write_json("certificate.json", j);
    r.summary = {{"E_star", cert.Estar}, {"b_star", cert.bstar}, {"lambda_sharp", cert.lambda_sharp}, {"theta_sharp", th}};
  } else if (e == "nofold") {
    const double eps = r.eps(10);
    EdgeFrame f = r.frame(1, 0);
    json j = nofold_panel(r, eps, f, r.deltas({0.5})[0], "nofold");
    r.write_json("nofold.json", j);
    r.summary = {{"holds", j["holds"]}, {"has_gap", j["has_gap"]}};
  } else if (e == "edge") {
    StripSpec d;
    d.eps = r.eps(10);
    d.frame = r.frame(1, 0);
    d.wall = r.wall("tanh");
    auto s = strip_spec(r, d);
    auto deltas = r.deltas({0.5});
    if (c.kpar.size() > 1) {
      kpar_sweep(r, s, deltas[0], c.kpar, "");
    } else {
      delta_sweep(r, s, c.kpar.empty() ? kpar_star(s.frame) : c.kpar[0], deltas, "");
    }
  } else if (e == "effective") {
    const double eps = r.eps(10);
    EdgeFrame f = r.frame(1, 0);
    DomainWall w = r.wall("tanh");
    auto deltas = r.deltas({0.1, 0.2});
    run_effective(r, eps, f, w, deltas, "", true);
    if (eps * v11(r.V).real() < 0) run_effective(r, eps, f, w, deltas, "", false);
  } else if (e == "threshold") {
    const double eps = r.eps(1);
    EdgeFrame f = r.frame(1, 1);
    const double kp = r.kpars({kpar_star(f)})[0];
    const double dmax = r.deltas({5.0}).back();
    const Vec2 base = kp / (2 * kPi) * f.K1;
    r.say("bisection for the gap above band 1");
    auto g = gap_threshold(eps, r.V, r.W, 1.0, f, base, 1, 0.0, dmax, 0.05, c.nlambda, c.N, c.threads);
    r.write("threshold_probes.csv", [&](std::ostream& os) {
      os << "delta,gap_width\n";
      for (const auto& [d, w] : g.probes) os << fmt12(d) << ',' << fmt12(w) << '\n';
    });
    StripSpec d;
    d.eps = eps;
    d.frame = f;
    d.wall = r.wall("tanh");
    d.NT = 216;
    d.bands = 12;
    auto s = strip_spec(r, d);
    json checks = json::array();
    for (double dl : {g.lo - 0.1, g.hi + 0.1}) {
      if (dl <= 0) continue;
      EdgeOptions o = edge_options(r, s, NAN, c.threads);
      o.gap_band = 1;
      o.halfwidth = 0.05;
      auto sp = edge_spectrum(strip_model(r, s, dl), kp, o);
      checks.push_back(point_json(sp));
    }
    r.write_json("threshold.json", {{"eps", eps},
                                    {"edge", {f.a1, f.b1}},
                                    {"kpar", kp},
                                    {"band", g.band},
                                    {"delta_star", {g.lo, g.hi}},
                                    {"strip_checks", checks}});
    r.summary = {{"delta_star", {g.lo, g.hi}}};
  } else {
    throw InputError("unknown experiment '" + e + "' (see 'hexedge list')");
  }
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg, std::ostream* log) {
  const ExperimentInfo* info = find_experiment(cfg.experiment);
  if (!info) throw InputError("unknown experiment '" + cfg.experiment + "' (see 'hexedge list')");
  FourierPotential V, W;
  try {
    V = cfg.V();
    W = cfg.W();
  } catch (const std::exception& e) {
    throw InputError(std::string("potential file: ") + e.what());
  }
  Run r{cfg, fs::path(cfg.out), log, V, W, {}, {}, {}};
  auto sym = check_honeycomb(r.V);
  if (!sym.ok) throw InputError("potential is not a honeycomb potential: " + sym.violations.front());
  auto odd = check_odd(r.W);
  if (!odd.ok) throw InputError("odd potential is not odd: " + odd.violations.front());
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) throw InputError("cannot create output directory " + cfg.out + ": " + ec.message());
  r.say(cfg.experiment + ": " + info->description);
  dispatch(r);

  json man;
  man["hexedge_version"] = kVersion;
  man["experiment"] = cfg.experiment;
  man["description"] = info->description;
  man["config"] = config_json(cfg);
  man["resolved"] = r.resolved;
  man["summary"] = r.summary;
  man["files"] = r.files;
  int maj = 0, min = 0, pat = 0;
  LAPACK_ilaver(&maj, &min, &pat);
  man["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
                      {"lapack", std::to_string(maj) + "." + std::to_string(min) + "." + std::to_string(pat)},
                      {"fftw", std::string(fftw_version)}};
  r.write_json("run.json", man);
  return {r.files, man};
}

}  // namespace hexedge
