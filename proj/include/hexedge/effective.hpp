#pragma once

#include <iosfwd>
#include <vector>

#include "hexedge/dirac.hpp"
#include "json.hpp"

namespace hexedge {

// D = -i c sigma3 d/dzeta + theta kappa(zeta) sigma1
struct DiracModel {
  double c = 1;
  double theta = 1;
  DomainWall wall;
};

// c = |lambda_sharp| |K2|, theta = theta_sharp
DiracModel dirac_model(const DiracPointCertificate& cert, double theta, const EdgeFrame& frame,
                       const DomainWall& wall);

// alpha(zeta) = f(zeta) (1, -i sign(theta)) / sqrt2 with f = (cosh zeta)^(-p) / norm, p = |theta| kappa_inf / c.
struct DiracZeroModeAnalytic {
  double p = 0;
  double norm = 1;
  int sign = 1;
  double amplitude(double zeta) const;
  Eigen::Vector2cd operator()(double zeta) const;
};
DiracZeroModeAnalytic dirac_zero_mode_analytic(const DiracModel& m);

// max |D alpha| over interior grid points, fourth-order differences; alpha sampled at zeta0 + j h
double dirac_residual(const DiracModel& m, const std::vector<Eigen::Vector2cd>& alpha, double zeta0, double h);

struct DiracZeroMode {
  double energy = 0;        // eigenvalue of the discretized operator nearest 0 (>= 0)
  double next = 0;          // next eigenvalue magnitude
  bool separated = true;    // next > 10 |energy|
  std::vector<double> zeta;
  std::vector<Eigen::Vector2cd> alpha;  // unit norm in the sum h |alpha|^2
};
// Discretization on [-L, L] with n cells that is free of spurious doublers: in the chiral basis
// D = [[0, B^*], [B, 0]], B = -i (c d - theta kappa), B is a square forward-difference matrix with
// the mass averaged to cell midpoints. The pair nearest 0 comes from the smallest singular value of B.
DiracZeroMode dirac_zero_mode_numeric(const DiracModel& m, double L, int n);

// Pearson correlation of two sampled profiles.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

// (H(K*) - E*)^-1 on the complement of Phi*, by an LU factorization of the bordered matrix
// [[H - E*, Phi], [Phi^*, 0]]. Immutable after construction.
class DeflatedResolvent {
 public:
  DeflatedResolvent(const MatrixXc& H, double E, const VectorXc& phi, double next_gap);
  VectorXc apply(const VectorXc& f) const;
  double residual(const VectorXc& f, const VectorXc& u) const;
  const VectorXc& phi() const { return phi_; }

 private:
  MatrixXc H_;
  double E_;
  VectorXc phi_;
  Eigen::PartialPivLU<MatrixXc> lu_;
};

struct BandEdge {
  Vec2 Kstar;
  double eps = 0;
  PlaneWaveBasis basis;
  MatrixXc H;
  double E = 0, E2 = 0;  // lowest and next eigenvalue
  VectorXc phi;
};
BandEdge lowest_band_edge(double eps, const FourierPotential& V, const Vec2& Kstar, int N = 8);

VectorXc resolvent_apply(const BandEdge& edge, const VectorXc& f);

struct SchrodingerModel {
  double eps = 0;
  EdgeFrame frame;
  Vec2 Kstar;
  double E = 0;                 // lowest eigenvalue at Kstar
  double a = 0, a_imag = 0;
  double b = 0;
  double half_inv_mass = 0;     // 1 / (2 m_eff), resolvent formula
  double half_inv_mass_fd = 0;  // (1/2) E'' along K2, Richardson-extrapolated differences
  double inner_W = 0, inner_grad = 0;
  DomainWall wall;
  double m_eff_inv() const { return 2 * half_inv_mass; }
  double Q(double zeta) const;
};

SchrodingerModel schrodinger_coefficients(double eps, const FourierPotential& V, const FourierPotential& W,
                                          const Vec2& Kstar, const EdgeFrame& frame, int N = 8);

struct HeffState {
  double mu = 0;
  double error = 0;      // |mu(h) - mu(h/2)|
  double tail_mass = 0;  // mass beyond |zeta| = L/2
  std::vector<double> zeta, A0;
};
struct HeffResult {
  double L = 0, h = 0;
  std::vector<HeffState> states;
};

// Central differences on [-L, L] with n intervals and zero boundary values.
HeffResult solve_heff(const SchrodingerModel& m, double L, int n);
// Repeats solve_heff doubling L at fixed spacing until the list is stable or L reaches Lmax.
HeffResult solve_heff_adaptive(const SchrodingerModel& m, double h = 0.05, double L0 = 40, double Lmax = 2560);

double predict_edge_energy(const SchrodingerModel& m, double mu, double delta);

struct HomotopyResult {
  double theta_lo = 0, theta_hi = 1;  // bound state present at theta_lo, absent at theta_hi
  bool found = false;
};
// Wall tanh + theta A exp(-z^2 / w): bisection for the disappearance of the bound state.
HomotopyResult homotopy_threshold(SchrodingerModel m, double A, double w, double tol = 1e-3);

nlohmann::json schrodinger_json(const SchrodingerModel& m, const HeffResult& r);
nlohmann::json dirac_model_json(const DiracModel& m, const DiracZeroMode& z);
void write_heff_csv(std::ostream& os, const SchrodingerModel& m, const HeffResult& r);

}  // namespace hexedge
