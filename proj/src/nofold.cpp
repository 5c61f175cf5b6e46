#include "hexedge/nofold.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hexedge/parallel.hpp"

namespace hexedge {

std::vector<SliceDiracPoint> slice_dirac_points(const EdgeFrame& f, const Third& Ks) {
  auto m3 = [](long x) { return ((x % 3) + 3) % 3; };
  std::vector<SliceDiracPoint> out;
  // Kstar is a vertex, so lambda K2 must have coordinates in (1/3) Z; lambda = t/3 with |t| <= 1
  for (int t = -1; t <= 1; ++t) {
    long n1 = Ks.n1 - static_cast<long>(t) * f.b1;
    long n2 = Ks.n2 + static_cast<long>(t) * f.a1;
    const Third& K = high_symmetry().K3;
    const Third& Kp = high_symmetry().Kprime3;
    SliceDiracPoint p;
    p.thirds = t;
    p.lambda = t / 3.0;
    if (m3(n1 - K.n1) == 0 && m3(n2 - K.n2) == 0) out.push_back(p);
    else if (m3(n1 - Kp.n1) == 0 && m3(n2 - Kp.n2) == 0) {
      p.kprime = true;
      out.push_back(p);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::abs(a.lambda) < std::abs(b.lambda) || (std::abs(a.lambda) == std::abs(b.lambda) && a.lambda > b.lambda);
  });
  return out;
}

std::vector<std::pair<double, double>> merge_intervals(std::vector<std::pair<double, double>> iv) {
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& x : iv) {
    if (!out.empty() && x.first <= out.back().second) out.back().second = std::max(out.back().second, x.second);
    else out.push_back(x);
  }
  return out;
}

std::vector<std::pair<double, double>> band_intervals(const BandSlice& s) {
  std::vector<std::pair<double, double>> iv;
  if (s.energies.empty()) return iv;
  const size_t nb = s.energies[0].size();
  for (size_t b = 0; b < nb; ++b) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& e : s.energies) {
      lo = std::min(lo, e[b]);
      hi = std::max(hi, e[b]);
    }
    iv.push_back({lo, hi});
  }
  return iv;
}

std::vector<double> refined_lambdas(int nlambda, const std::vector<double>& centers, int nrefine, double hw) {
  std::vector<double> l = lambda_grid(nlambda);
  for (double c : centers)
    for (int i = 0; i < nrefine; ++i) {
      double x = c - hw + 2 * hw * i / std::max(1, nrefine - 1);
      if (x <= -0.5) x += 1;
      if (x > 0.5) x -= 1;
      l.push_back(x);
    }
  std::sort(l.begin(), l.end());
  l.erase(std::unique(l.begin(), l.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }), l.end());
  return l;
}

NoFoldReport check_nofold(double eps, double delta, const FourierPotential& V, const FourierPotential& W,
                          double kappa_inf, const EdgeFrame& frame, const Third& Kstar, double Estar, int nbands,
                          const NoFoldOptions& opt) {
  if (delta == 0) throw std::invalid_argument("no-fold check needs delta != 0");
  NoFoldReport r;
  r.frame = frame;
  r.eps = eps;
  r.delta = delta;
  r.kappa_inf = kappa_inf;
  r.Estar = Estar;
  r.points = slice_dirac_points(frame, Kstar);
  std::vector<double> centers;
  for (const auto& p : r.points) centers.push_back(p.lambda);
  auto lambdas = refined_lambdas(opt.nlambda, centers, opt.nrefine, opt.refine_halfwidth);
  SliceOptions so;
  so.N = opt.N;
  so.W = &W;
  so.threads = opt.threads;
  so.w_scale = delta * kappa_inf;
  r.plus = band_slice_at(eps, V, frame, Kstar.cart(), lambdas, nbands, so);
  so.w_scale = -delta * kappa_inf;
  r.minus = band_slice_at(eps, V, frame, Kstar.cart(), lambdas, nbands, so);
  auto iv = band_intervals(r.plus);
  auto ivm = band_intervals(r.minus);
  iv.insert(iv.end(), ivm.begin(), ivm.end());
  r.intervals = merge_intervals(iv);

  double lo = -INFINITY, hi = INFINITY;
  bool inside = false;
  for (const auto& [a, b] : r.intervals) {
    if (Estar >= a - opt.margin && Estar <= b + opt.margin) inside = true;
    if (b < Estar) lo = std::max(lo, b);
    if (a > Estar) hi = std::min(hi, a);
  }
  r.has_gap = !inside && std::isfinite(hi);
  r.gap_lo = lo;
  r.gap_hi = hi;
  r.holds = r.has_gap && lo < Estar && Estar < hi;

  // a gap edge attained where the band moves by more than the gap margin between
  // neighbouring grid points is not resolved by the grid
  if (r.has_gap) {
    double margin = std::min(Estar - lo, hi - Estar);
    for (const BandSlice* s : {&r.plus, &r.minus})
      for (size_t i = 0; i < s->lambdas.size(); ++i)
        for (size_t b = 0; b < s->energies[i].size(); ++b) {
          double e = s->energies[i][b];
          if (e != lo && e != hi) continue;
          for (int d : {-1, 1}) {
            long j = static_cast<long>(i) + d;
            if (j < 0 || j >= static_cast<long>(s->lambdas.size())) continue;
            if (std::abs(s->energies[j][b] - e) > margin) r.resolution_warning = true;
          }
        }
  }
  return r;
}

std::vector<std::pair<double, double>> slice_band_ranges(double eps, double delta, const FourierPotential& V,
                                                         const FourierPotential& W, double kappa_inf,
                                                         const EdgeFrame& frame, const Vec2& base, int nbands,
                                                         int nlambda, int N, int threads) {
  std::vector<double> scales{0.0};
  if (delta != 0 && !W.empty()) scales = {delta * kappa_inf, -delta * kappa_inf};
  std::vector<std::pair<double, double>> range(nbands, {INFINITY, -INFINITY});
  const auto grid = lambda_grid(nlambda);
  const double h = 1.0 / std::max(1, nlambda - 1);
  for (double s : scales) {
    SliceOptions so;
    so.N = N;
    so.W = &W;
    so.w_scale = s;
    so.threads = threads;
    auto sl = band_slice_at(eps, V, frame, base, grid, nbands, so);
    struct Task {
      int band;
      double sign;  // +1: minimum, -1: maximum
      double center;
    };
    std::vector<Task> tasks;
    for (int b = 0; b < nbands; ++b) {
      size_t imin = 0, imax = 0;
      for (size_t i = 0; i < grid.size(); ++i) {
        if (sl.energies[i][b] < sl.energies[imin][b]) imin = i;
        if (sl.energies[i][b] > sl.energies[imax][b]) imax = i;
      }
      range[b].first = std::min(range[b].first, sl.energies[imin][b]);
      range[b].second = std::max(range[b].second, sl.energies[imax][b]);
      tasks.push_back({b, 1, grid[imin]});
      tasks.push_back({b, -1, grid[imax]});
    }
    so.threads = 1;
    auto polished = parallel_map<double>(static_cast<int>(tasks.size()), threads, [&](int t) {
      const Task& task = tasks[t];
      auto f = [&](double l) {
        return task.sign * slice_energies(eps, V, base + l * frame.K2, task.band + 1, so)[task.band];
      };
      auto r = boost::math::tools::brent_find_minima(f, task.center - h, task.center + h, 40);
      return task.sign * r.second;
    });
    for (size_t t = 0; t < tasks.size(); ++t) {
      auto& rg = range[tasks[t].band];
      if (tasks[t].sign > 0) rg.first = std::min(rg.first, polished[t]);
      else rg.second = std::max(rg.second, polished[t]);
    }
  }
  return range;
}

double slice_gap_width(double eps, double delta, const FourierPotential& V, const FourierPotential& W,
                       double kappa_inf, const EdgeFrame& frame, const Vec2& base, int band, int nlambda, int N,
                       int threads) {
  if (band < 1) throw std::invalid_argument("band index is 1-based");
  auto r = slice_band_ranges(eps, delta, V, W, kappa_inf, frame, base, band + 2, nlambda, N, threads);
  double top = -INFINITY, bottom = INFINITY;
  for (int b = 0; b < band + 2; ++b) {
    if (b < band) top = std::max(top, r[b].second);
    else bottom = std::min(bottom, r[b].first);
  }
  return bottom - top;
}

GapThreshold gap_threshold(double eps, const FourierPotential& V, const FourierPotential& W, double kappa_inf,
                           const EdgeFrame& frame, const Vec2& base, int band, double lo, double hi, double tol,
                           int nlambda, int N, int threads) {
  GapThreshold g;
  g.band = band;
  auto width = [&](double d) {
    double w = slice_gap_width(eps, d, V, W, kappa_inf, frame, base, band, nlambda, N, threads);
    g.probes.push_back({d, w});
    return w;
  };
  if (width(lo) > 0) throw std::runtime_error("gap already open at the lower bracket");
  if (width(hi) <= 0) throw std::runtime_error("gap still closed at the upper bracket");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (width(mid) > 0 ? hi : lo) = mid;
  }
  g.lo = lo;
  g.hi = hi;
  return g;
}

void write_nofold_csv(std::ostream& os, const NoFoldReport& r) {
  os << "lambda,band,energy,operator\n";
  for (const auto* s : {&r.plus, &r.minus}) {
    const char* tag = s == &r.plus ? "+" : "-";
    for (size_t i = 0; i < s->lambdas.size(); ++i)
      for (size_t b = 0; b < s->energies[i].size(); ++b)
        os << fmt12(s->lambdas[i]) << ',' << b + 1 << ',' << fmt12(s->energies[i][b]) << ',' << tag << '\n';
  }
}

nlohmann::json nofold_json(const NoFoldReport& r) {
  nlohmann::json j;
  j["edge"] = {r.frame.a1, r.frame.b1};
  j["eps"] = r.eps;
  j["delta"] = r.delta;
  j["kappa_inf"] = r.kappa_inf;
  j["E_star"] = r.Estar;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) pts.push_back({{"lambda", p.lambda}, {"type", p.type()}});
  j["slice_dirac_points"] = pts;
  j["intervals"] = r.intervals;
  j["has_gap"] = r.has_gap;
  if (r.has_gap) j["gap"] = {r.gap_lo, r.gap_hi};
  j["holds"] = r.holds;
  j["resolution_warning"] = r.resolution_warning;
  return j;
}

}  // namespace hexedge
