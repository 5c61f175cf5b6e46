#include "hexedge/lattice.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hexedge {

const LatticeBasis& lattice() {
  static const LatticeBasis b = [] {
    LatticeBasis l;
    const double s3 = std::sqrt(3.0);
    l.q = 4.0 * kPi / s3;
    l.v1 = Vec2(s3 / 2, 0.5);
    l.v2 = Vec2(s3 / 2, -0.5);
    l.k1 = l.q * Vec2(0.5, s3 / 2);
    l.k2 = l.q * Vec2(0.5, -s3 / 2);
    return l;
  }();
  return b;
}

Vec2 dual_point(double c1, double c2) { return c1 * lattice().k1 + c2 * lattice().k2; }

Vec2 Third::cart() const { return dual_point(n1 / 3.0, n2 / 3.0); }

std::string Third::str() const {
  std::ostringstream os;
  os << "(" << n1 << "/3, " << n2 << "/3)";
  return os.str();
}

const HighSymmetry& high_symmetry() {
  static const HighSymmetry h = [] {
    HighSymmetry s;
    s.K = (lattice().k1 - lattice().k2) / 3.0;
    s.Kprime = -s.K;
    const double c = std::cos(2 * kPi / 3), sn = std::sin(2 * kPi / 3);
    s.R << c, -sn, sn, c;
    s.tau = std::polar(1.0, 2 * kPi / 3);
    return s;
  }();
  return h;
}

Index2 rotate_index(const Index2& m) { return {m[1] - m[0], -m[0]}; }

Third rotate(const Third& p) { return {p.n2 - p.n1, -p.n1}; }

static long mod3(long x) { return ((x % 3) + 3) % 3; }

bool is_rotation_fixed(const Third& p) {
  Third r = rotate(p);
  return mod3(r.n1 - p.n1) == 0 && mod3(r.n2 - p.n2) == 0;
}

Index2 rotation_shift(const Third& p) {
  if (!is_rotation_fixed(p)) throw std::invalid_argument("quasimomentum " + p.str() + " is not fixed by R");
  Third r = rotate(p);
  return {static_cast<int>((r.n1 - p.n1) / 3), static_cast<int>((r.n2 - p.n2) / 3)};
}

std::string EdgeFrame::name() const {
  if (a1 == 1 && b1 == 0) return "zigzag";
  if (a1 == 1 && b1 == 1) return "armchair";
  return "(" + std::to_string(a1) + "," + std::to_string(b1) + ")";
}

std::pair<int, int> unimodular_complete(int a1, int b1) {
  if (a1 == 0 && b1 == 0) throw std::invalid_argument("edge (0,0) is not a lattice direction");
  if (std::gcd(std::abs(a1), std::abs(b1)) != 1)
    throw std::invalid_argument("edge (" + std::to_string(a1) + "," + std::to_string(b1) +
                                ") is not primitive: gcd(a1,b1) must be 1");
  // extended Euclid: a1*x + b1*y = 1, then a1*b2 - a2*b1 = 1 with b2 = x, a2 = -y
  long old_r = a1, r = b1, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    long qt = old_r / r;
    long tmp = old_r - qt * r; old_r = r; r = tmp;
    tmp = old_s - qt * s; old_s = s; s = tmp;
    tmp = old_t - qt * t; old_t = t; t = tmp;
  }
  if (old_r < 0) { old_s = -old_s; old_t = -old_t; }
  long b2 = old_s, a2 = -old_t;
  // general solution (a2 + n a1, b2 + n b1); minimize |a2|, ties toward a2 >= 0, then |b2|
  auto better = [](long x2, long y2, long bx, long by) {
    if (std::abs(x2) != std::abs(bx)) return std::abs(x2) < std::abs(bx);
    if (x2 != bx) return x2 > bx;
    if (std::abs(y2) != std::abs(by)) return std::abs(y2) < std::abs(by);
    return y2 > by;
  };
  long best_a = a2, best_b = b2;
  long n0 = 0;
  if (a1 != 0) n0 = -static_cast<long>(std::llround(static_cast<double>(a2) / a1));
  else if (b1 != 0) n0 = -static_cast<long>(std::llround(static_cast<double>(b2) / b1));
  for (long n = n0 - 2; n <= n0 + 2; ++n) {
    long x2 = a2 + n * a1, y2 = b2 + n * b1;
    if (better(x2, y2, best_a, best_b)) { best_a = x2; best_b = y2; }
  }
  return {static_cast<int>(best_a), static_cast<int>(best_b)};
}

EdgeFrame edge_frame(int a1, int b1) {
  auto [a2, b2] = unimodular_complete(a1, b1);
  const auto& L = lattice();
  EdgeFrame f;
  f.a1 = a1; f.b1 = b1; f.a2 = a2; f.b2 = b2;
  f.v1 = a1 * L.v1 + b1 * L.v2;
  f.v2 = a2 * L.v1 + b2 * L.v2;
  f.K1 = b2 * L.k1 - a2 * L.k2;
  f.K2 = -b1 * L.k1 + a1 * L.k2;
  return f;
}

double reduce_angle(double a) {
  double r = std::fmod(a, 2 * kPi);
  if (r <= -kPi) r += 2 * kPi;
  if (r > kPi) r -= 2 * kPi;
  return r;
}

double kpar_star(const EdgeFrame& f) {
  // K has dual coordinates (1/3, -1/3); its K1 coordinate is (a1 - b1)/3
  switch (mod3(f.a1 - f.b1)) {
    case 0: return 0.0;
    case 1: return 2 * kPi / 3;
    default: return -2 * kPi / 3;
  }
}

Vec2 to_brillouin_zone(const Vec2& k) {
  const auto& L = lattice();
  // reduce to the unit rhombus first, then pick the nearest dual lattice point
  Eigen::Matrix2d B;
  B.col(0) = L.k1;
  B.col(1) = L.k2;
  Vec2 c = B.colPivHouseholderQr().solve(k);
  Vec2 base = k - std::floor(c(0)) * L.k1 - std::floor(c(1)) * L.k2;
  Vec2 best = base;
  double bn = base.squaredNorm();
  for (int s = -2; s <= 2; ++s)
    for (int t = -2; t <= 2; ++t) {
      Vec2 p = base - s * L.k1 - t * L.k2;
      double pn = p.squaredNorm();
      if (pn < bn - 1e-12) { best = p; bn = pn; }
    }
  return best;
}

std::vector<Vec2> bz_grid(int n) {
  if (n < 1) throw std::invalid_argument("bz_grid needs n >= 1");
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.push_back(to_brillouin_zone(dual_point(double(i) / n, double(j) / n)));
  return out;
}

}  // namespace hexedge
