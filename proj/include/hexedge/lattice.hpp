#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace hexedge {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Index2 = std::array<int, 2>;

constexpr double kPi = 3.14159265358979323846;

struct LatticeBasis {
  Vec2 v1, v2;  // period lattice
  Vec2 k1, k2;  // dual lattice, k_l . v_m = 2 pi delta_lm
  double q;     // |k1| = 4 pi / sqrt(3)
};

const LatticeBasis& lattice();

// Point of the dual plane with exact coordinates (n1/3, n2/3) in the (k1, k2) basis.
// Every vertex of the Brillouin zone has this form.
struct Third {
  long n1 = 0;
  long n2 = 0;
  Vec2 cart() const;
  bool operator==(const Third&) const = default;
  std::string str() const;
};

struct HighSymmetry {
  Vec2 K, Kprime;
  Eigen::Matrix2d R;  // counterclockwise rotation by 2 pi / 3
  cplx tau;           // exp(2 pi i / 3)
  Third K3{1, -1};
  Third Kprime3{-1, 1};
};

const HighSymmetry& high_symmetry();

// Action of R on dual-lattice indices: R(m1 k1 + m2 k2) = (m2 - m1) k1 - m1 k2.
Index2 rotate_index(const Index2& m);
Third rotate(const Third& p);
// True if p is fixed by R modulo the dual lattice (p is Gamma or a BZ vertex).
bool is_rotation_fixed(const Third& p);
// Dual lattice vector R p - p, in (k1, k2) indices. Requires is_rotation_fixed(p).
Index2 rotation_shift(const Third& p);

Vec2 dual_point(double c1, double c2);

struct EdgeFrame {
  int a1 = 1, b1 = 0, a2 = 0, b2 = 1;
  Vec2 v1, v2;  // edge vectors
  Vec2 K1, K2;  // dual frame

  // (k1, k2) index -> coefficients with respect to (K1, K2)
  Index2 to_frame(const Index2& w) const { return {a1 * w[0] + b1 * w[1], a2 * w[0] + b2 * w[1]}; }
  Index2 from_frame(const Index2& c) const { return {b2 * c[0] - b1 * c[1], -a2 * c[0] + a1 * c[1]}; }
  std::string name() const;
};

std::pair<int, int> unimodular_complete(int a1, int b1);
EdgeFrame edge_frame(int a1, int b1);

// K . v1 reduced to (-pi, pi].
double kpar_star(const EdgeFrame& f);
double reduce_angle(double a);

// Representative of k in the hexagonal Brillouin zone.
Vec2 to_brillouin_zone(const Vec2& k);
std::vector<Vec2> bz_grid(int n);

}  // namespace hexedge
