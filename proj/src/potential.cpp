#include "hexedge/potential.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hexedge {

cplx FourierPotential::coeff(const Index2& m) const {
  auto it = coeffs.find(m);
  return it == coeffs.end() ? cplx(0) : it->second;
}

cplx FourierPotential::eval_complex(const Vec2& x) const {
  const auto& L = lattice();
  cplx s = 0;
  for (const auto& [m, c] : coeffs) s += c * std::polar(1.0, (m[0] * L.k1 + m[1] * L.k2).dot(x));
  return s;
}

int FourierPotential::max_index() const {
  int r = 0;
  for (const auto& kv : coeffs) r = std::max({r, std::abs(kv.first[0]), std::abs(kv.first[1])});
  return r;
}

FourierPotential FourierPotential::scaled(cplx s) const {
  FourierPotential p;
  for (const auto& [m, c] : coeffs) p.coeffs[m] = s * c;
  return p;
}

std::string FourierPotential::to_text() const {
  std::string out;
  char buf[128];
  for (const auto& [m, c] : coeffs) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", m[0], m[1], c.real(), c.imag());
    out += buf;
  }
  return out;
}

FourierPotential FourierPotential::from_text(const std::string& text) {
  FourierPotential p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int m1, m2;
    double re, im;
    if (!(ls >> m1)) continue;
    if (!(ls >> m2 >> re >> im)) throw std::invalid_argument("potential line " + std::to_string(lineno) + ": expected 'm1 m2 re im'");
    p.coeffs[{m1, m2}] += cplx(re, im);
  }
  return p;
}

FourierPotential FourierPotential::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open potential file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

BuiltinPotentials builtin_example() {
  BuiltinPotentials b;
  for (Index2 m : {Index2{1, 0}, Index2{0, 1}, Index2{1, 1}}) {
    Index2 n{-m[0], -m[1]};
    b.V.coeffs[m] = 0.5;
    b.V.coeffs[n] = 0.5;
    b.W.coeffs[m] = cplx(0, -0.5);
    b.W.coeffs[n] = cplx(0, 0.5);
  }
  return b;
}

V11Check v11_check(const FourierPotential& V, int nq) {
  const auto& L = lattice();
  cplx acc = 0;
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < nq; ++j) {
      double s = double(i) / nq, t = double(j) / nq;
      Vec2 y = s * L.v1 + t * L.v2;
      acc += std::polar(1.0, -(L.k1 + L.k2).dot(y)) * V.eval_complex(y);
    }
  V11Check r;
  r.lookup = V.coeff({1, 1});
  r.quadrature = acc / double(nq * nq);
  r.difference = std::abs(r.lookup - r.quadrature);
  return r;
}

cplx v11(const FourierPotential& V) {
  auto r = v11_check(V);
  if (r.difference > 1e-10) throw std::runtime_error("V11 lookup and quadrature disagree");
  return r.lookup;
}

static std::string idx_str(const Index2& m) { return "(" + std::to_string(m[0]) + "," + std::to_string(m[1]) + ")"; }

SymmetryReport check_honeycomb(const FourierPotential& V, double tol) {
  SymmetryReport rep;
  auto fail = [&](const std::string& s) { rep.ok = false; rep.violations.push_back(s); };
  for (const auto& [m, c] : V.coeffs) {
    Index2 n{-m[0], -m[1]};
    cplx cn = V.coeff(n);
    if (std::abs(cn - c) > tol) fail("even: index " + idx_str(m));
    if (std::abs(cn - std::conj(c)) > tol) fail("real: index " + idx_str(m));
    if (std::abs(V.coeff(rotate_index(m)) - c) > tol) fail("rotation: index " + idx_str(m) + " -> " + idx_str(rotate_index(m)));
  }
  return rep;
}

SymmetryReport check_odd(const FourierPotential& W, double tol) {
  SymmetryReport rep;
  for (const auto& [m, c] : W.coeffs) {
    Index2 n{-m[0], -m[1]};
    cplx cn = W.coeff(n);
    if (std::abs(cn + c) > tol) { rep.ok = false; rep.violations.push_back("odd: index " + idx_str(m)); }
    if (std::abs(cn - std::conj(c)) > tol) { rep.ok = false; rep.violations.push_back("real: index " + idx_str(m)); }
  }
  return rep;
}

DomainWall DomainWall::tanh(double kinf) {
  if (!(kinf > 0)) throw std::invalid_argument("kappa_inf must be positive");
  DomainWall w;
  w.kappa_inf = kinf;
  return w;
}

DomainWall DomainWall::tanh_plus_bump(double A, double width, double kinf) {
  DomainWall w = tanh(kinf);
  if (!(width > 0)) throw std::invalid_argument("bump width must be positive");
  w.kind = WallKind::TanhPlusBump;
  w.amplitude = A;
  w.width = width;
  return w;
}

DomainWall DomainWall::tanh_plus_odd_bump(double A, double width, double kinf) {
  DomainWall w = tanh_plus_bump(A, width, kinf);
  w.kind = WallKind::TanhPlusOddBump;
  return w;
}

DomainWall DomainWall::tabulated(double zmin, double zmax, std::vector<double> samples, double kinf) {
  DomainWall w = tanh(kinf);
  if (samples.size() < 4 || !(zmax > zmin)) throw std::invalid_argument("tabulated wall needs >= 4 samples on zmin < zmax");
  w.kind = WallKind::Tabulated;
  w.zmin = zmin;
  w.zmax = zmax;
  w.samples = std::move(samples);
  return w;
}

namespace {
// Catmull-Rom interpolation on uniform samples; returns value and derivative.
std::pair<double, double> interp(const DomainWall& w, double z) {
  if (z < w.zmin || z > w.zmax) throw std::out_of_range("tabulated wall evaluated outside its sample range");
  const auto& s = w.samples;
  const int n = static_cast<int>(s.size());
  const double h = (w.zmax - w.zmin) / (n - 1);
  double u = (z - w.zmin) / h;
  int i = std::min(static_cast<int>(std::floor(u)), n - 2);
  double t = u - i;
  auto at = [&](int j) {
    if (j < 0) return 2 * s[0] - s[1];
    if (j >= n) return 2 * s[n - 1] - s[n - 2];
    return s[j];
  };
  double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  double m1 = 0.5 * (p2 - p0), m2 = 0.5 * (p3 - p1);
  double t2 = t * t, t3 = t2 * t;
  double v = (2 * t3 - 3 * t2 + 1) * p1 + (t3 - 2 * t2 + t) * m1 + (-2 * t3 + 3 * t2) * p2 + (t3 - t2) * m2;
  double d = (6 * t2 - 6 * t) * p1 + (3 * t2 - 4 * t + 1) * m1 + (-6 * t2 + 6 * t) * p2 + (3 * t2 - 2 * t) * m2;
  return {v, d / h};
}
}  // namespace

double DomainWall::shape(double z) const {
  switch (kind) {
    case WallKind::Tanh: return std::tanh(z);
    case WallKind::TanhPlusBump: return std::tanh(z) + amplitude * std::exp(-z * z / width);
    case WallKind::TanhPlusOddBump: return std::tanh(z) + amplitude * z / std::sqrt(width) * std::exp(-z * z / width);
    case WallKind::Tabulated: return interp(*this, z).first / kappa_inf;
  }
  return 0;
}

double DomainWall::shape_deriv(double z) const {
  double c = std::cosh(z);
  double sech2 = std::isfinite(c) ? 1.0 / (c * c) : 0.0;
  switch (kind) {
    case WallKind::Tanh: return sech2;
    case WallKind::TanhPlusBump: return sech2 - 2 * z / width * amplitude * std::exp(-z * z / width);
    case WallKind::TanhPlusOddBump:
      return sech2 + amplitude / std::sqrt(width) * (1 - 2 * z * z / width) * std::exp(-z * z / width);
    case WallKind::Tabulated: return interp(*this, z).second / kappa_inf;
  }
  return 0;
}

std::string DomainWall::kind_name() const {
  switch (kind) {
    case WallKind::Tanh: return "tanh";
    case WallKind::TanhPlusBump: return "tanh_plus_bump";
    case WallKind::TanhPlusOddBump: return "tanh_plus_odd_bump";
    case WallKind::Tabulated: return "tabulated";
  }
  return "?";
}

std::string DomainWall::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << kind_name();
  switch (kind) {
    case WallKind::Tanh: os << ' ' << kappa_inf; break;
    case WallKind::TanhPlusBump:
    case WallKind::TanhPlusOddBump: os << ' ' << amplitude << ' ' << width << ' ' << kappa_inf; break;
    case WallKind::Tabulated:
      os << ' ' << zmin << ' ' << zmax << ' ' << kappa_inf;
      for (double v : samples) os << ' ' << v;
      break;
  }
  return os.str();
}

DomainWall DomainWall::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  std::vector<double> p;
  double x;
  while (in >> x) p.push_back(x);
  if (!in.eof()) throw std::invalid_argument("wall spec '" + text + "': non-numeric parameter");
  auto opt = [&](size_t i, double def) { return p.size() > i ? p[i] : def; };
  if (kind == "tanh") {
    if (p.size() > 1) throw std::invalid_argument("wall spec 'tanh' takes at most kappa_inf");
    return tanh(opt(0, 1.0));
  }
  if (kind == "tanh_plus_bump" || kind == "tanh_plus_odd_bump") {
    if (p.size() > 3) throw std::invalid_argument("wall spec '" + kind + "' takes A w [kappa_inf]");
    double A = opt(0, 10.0), w = opt(1, 50.0), k = opt(2, 1.0);
    return kind == "tanh_plus_bump" ? tanh_plus_bump(A, w, k) : tanh_plus_odd_bump(A, w, k);
  }
  if (kind == "tabulated") {
    if (p.size() < 7) throw std::invalid_argument("wall spec 'tabulated' takes zmin zmax kappa_inf v0 v1 v2 v3 ...");
    return tabulated(p[0], p[1], std::vector<double>(p.begin() + 3, p.end()), p[2]);
  }
  throw std::invalid_argument("unknown wall kind '" + kind + "'");
}

double kappa_eval(const DomainWall& wall, double zeta) { return wall(zeta); }

}  // namespace hexedge
