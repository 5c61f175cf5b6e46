#pragma once

#include <map>
#include <string>
#include <vector>

#include "hexedge/lattice.hpp"

namespace hexedge {

// Real field on the torus, f(x) = sum_m c_m exp(i (m1 k1 + m2 k2) . x).
struct FourierPotential {
  std::map<Index2, cplx> coeffs;

  cplx coeff(const Index2& m) const;
  cplx eval_complex(const Vec2& x) const;
  double eval(const Vec2& x) const { return eval_complex(x).real(); }
  int max_index() const;
  bool empty() const { return coeffs.empty(); }
  FourierPotential scaled(cplx s) const;

  // one line per coefficient: "m1 m2 re im"; '#' starts a comment
  std::string to_text() const;
  static FourierPotential from_text(const std::string& text);
  static FourierPotential load(const std::string& path);
};

struct BuiltinPotentials {
  FourierPotential V, W;
};
// V = sum cos(k_j . x), W = sum sin(k_j . x) over k_j in {k1, k2, k1 + k2}
BuiltinPotentials builtin_example();

struct V11Check {
  cplx lookup;
  cplx quadrature;
  double difference;
};
V11Check v11_check(const FourierPotential& V, int nq = 64);
// Both evaluations are performed; throws if they differ by more than 1e-10.
cplx v11(const FourierPotential& V);

struct SymmetryReport {
  bool ok = true;
  std::vector<std::string> violations;
};
SymmetryReport check_honeycomb(const FourierPotential& V, double tol = 1e-12);
SymmetryReport check_odd(const FourierPotential& W, double tol = 1e-12);

enum class WallKind { Tanh, TanhPlusBump, TanhPlusOddBump, Tabulated };

// kappa(zeta) = kappa_inf * g(zeta). g is tanh, tanh + A exp(-z^2/w),
// tanh + A (z/sqrt(w)) exp(-z^2/w), or a cubic interpolant of uniform samples.
struct DomainWall {
  WallKind kind = WallKind::Tanh;
  double kappa_inf = 1.0;
  double amplitude = 10.0;
  double width = 50.0;
  double zmin = 0, zmax = 0;
  std::vector<double> samples;

  static DomainWall tanh(double kinf = 1.0);
  static DomainWall tanh_plus_bump(double A = 10.0, double w = 50.0, double kinf = 1.0);
  static DomainWall tanh_plus_odd_bump(double A, double w, double kinf = 1.0);
  static DomainWall tabulated(double zmin, double zmax, std::vector<double> samples, double kinf);

  double shape(double z) const;        // kappa / kappa_inf
  double shape_deriv(double z) const;  // d shape / dz
  double operator()(double z) const { return kappa_inf * shape(z); }
  double deriv(double z) const { return kappa_inf * shape_deriv(z); }
  bool is_odd() const { return kind == WallKind::Tanh || kind == WallKind::TanhPlusOddBump; }

  std::string kind_name() const;
  // "tanh [kinf]" | "tanh_plus_bump A w [kinf]" | "tanh_plus_odd_bump A w [kinf]"
  // | "tabulated zmin zmax kinf v0 v1 ..."
  std::string to_text() const;
  static DomainWall from_text(const std::string& text);
};

double kappa_eval(const DomainWall& wall, double zeta);

}  // namespace hexedge
