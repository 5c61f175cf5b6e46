#include "hexedge/dirac.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hexedge {

VectorXc rotation_action(const Third& K, const PlaneWaveBasis& basis, const VectorXc& c) {
  Index2 shift = rotation_shift(K);
  VectorXc out = VectorXc::Zero(c.size());
  for (int i = 0; i < basis.dim(); ++i) {
    Index2 r = rotate_index(basis.idx[i]);
    int j = basis.find({r[0] + shift[0], r[1] + shift[1]});
    if (j < 0) throw std::invalid_argument("plane-wave basis is not closed under rotation");
    out(j) = c(i);
  }
  return out;
}

VectorXc fix_phase(const VectorXc& v) {
  double mx = v.cwiseAbs().maxCoeff();
  int k = 0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) >= mx * (1 - 1e-9)) { k = i; break; }
  return v * (std::abs(v(k)) / v(k));
}

static Eigen::Vector2cd grad_element(const PlaneWaveBasis& b, const Vec2& K, const VectorXc& bra, const VectorXc& ket) {
  Eigen::Vector2cd u = Eigen::Vector2cd::Zero();
  for (int i = 0; i < b.dim(); ++i) {
    Vec2 p = K + b.vec(i);
    cplx z = std::conj(bra(i)) * cplx(0, 1) * ket(i);
    u(0) += z * p.x();
    u(1) += z * p.y();
  }
  return u;
}

double lambda_sharp_along(const DiracPointCertificate& c, const Eigen::Vector2cd& zeta) {
  return 2 * std::abs(c.grad_element(0) * zeta(0) + c.grad_element(1) * zeta(1));
}

std::pair<double, double> cone_pair(const DiracPointCertificate& c, const FourierPotential& V, const Vec2& dir,
                                    double lambda) {
  MatrixXc H = assemble_matrix(c.Kstar + lambda * dir, c.basis, {{c.eps, &V}});
  auto ep = hermitian_eigen<cplx>(H, c.bstar - 1, c.bstar + 1, false);
  return {ep.values(0), ep.values(1)};
}

DiracPointCertificate certify_dirac(double eps, const FourierPotential& V, const Third& K, int N,
                                    const DiracOptions& opt) {
  if (!is_rotation_fixed(K)) throw std::invalid_argument("quasimomentum " + K.str() + " is not a Brillouin zone vertex");
  DiracPointCertificate c;
  c.K3 = K;
  c.Kstar = K.cart();
  c.N = N;
  c.eps = eps;
  c.basis = PlaneWaveBasis::disk(c.Kstar, N);
  if (N < V.max_index() + 1) throw std::invalid_argument("cutoff too small for potential");
  MatrixXc H = assemble_matrix(c.Kstar, c.basis, {{eps, &V}});
  const int nscan = std::min(opt.nscan + 2, c.basis.dim());
  auto ep = eigensolve(H, nscan);
  const auto& E = ep.values;
  const double thr = opt.degeneracy;

  int b = -1;
  for (int i = 0; i + 1 < nscan; ++i) {
    if (E(i + 1) - E(i) >= thr) continue;
    if (i + 2 < nscan && E(i + 2) - E(i + 1) < thr) throw std::runtime_error("degeneracy not two-fold");
    b = i;
    break;
  }
  if (b < 0) throw std::runtime_error("no degeneracy found");
  c.bstar = b + 1;
  c.Estar = 0.5 * (E(b) + E(b + 1));
  c.residuals["split"] = E(b + 1) - E(b);
  double below = b > 0 ? E(b) - E(b - 1) : INFINITY;
  double above = b + 2 < nscan ? E(b + 2) - E(b + 1) : INFINITY;
  if (below <= 10 * thr || above <= 10 * thr) throw std::runtime_error("degeneracy not two-fold");
  c.residuals["separation"] = std::min(below, above);

  MatrixXc P = ep.vectors.middleCols(b, 2);
  MatrixXc RP(P.rows(), 2);
  for (int j = 0; j < 2; ++j) RP.col(j) = rotation_action(K, c.basis, P.col(j));
  Eigen::Matrix2cd Rr = P.adjoint() * RP;
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(Rr);
  const cplx tau = high_symmetry().tau;
  int it = -1, itb = -1;
  for (int j = 0; j < 2; ++j) {
    if (std::abs(es.eigenvalues()(j) - tau) < 1e-8) it = j;
    if (std::abs(es.eigenvalues()(j) - std::conj(tau)) < 1e-8) itb = j;
  }
  if (it < 0 || itb < 0) throw std::runtime_error("rotation typing failed");
  c.Phi1 = fix_phase((P * es.eigenvectors().col(it)).normalized());
  VectorXc phi2 = (P * es.eigenvectors().col(itb)).normalized();
  VectorXc conj1 = c.Phi1.conjugate();
  cplx ov = phi2.dot(conj1);  // <phi2, conj Phi1>
  c.Phi2 = phi2 * (ov / std::abs(ov));

  c.residuals["typing_phi1"] = (rotation_action(K, c.basis, c.Phi1) - tau * c.Phi1).norm();
  c.residuals["typing_phi2"] = (rotation_action(K, c.basis, c.Phi2) - std::conj(tau) * c.Phi2).norm();
  c.residuals["conjugate_pair"] = (c.Phi2 - conj1).norm();
  Eigen::Matrix2cd G;
  G << c.Phi1.dot(c.Phi1), c.Phi1.dot(c.Phi2), c.Phi2.dot(c.Phi1), c.Phi2.dot(c.Phi2);
  c.residuals["orthonormality"] = (G - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  c.residuals["eigen_residual"] =
      std::max((H * c.Phi1 - c.Estar * c.Phi1).norm(), (H * c.Phi2 - c.Estar * c.Phi2).norm());
  if (c.residuals["typing_phi1"] > 1e-8 || c.residuals["typing_phi2"] > 1e-8) throw std::runtime_error("rotation typing failed");

  c.grad_element = grad_element(c.basis, c.Kstar, c.Phi2, c.Phi1);
  c.lambda_sharp = lambda_sharp_along(c, Eigen::Vector2cd(1, 0));
  // the modulus is the same for every real unit direction
  std::mt19937_64 gen(opt.seed);
  std::uniform_real_distribution<double> ang(0, 2 * kPi);
  double spread = 0;
  for (int t = 0; t < 8; ++t) {
    double a = ang(gen);
    spread = std::max(spread, std::abs(lambda_sharp_along(c, Eigen::Vector2cd(std::cos(a), std::sin(a))) - c.lambda_sharp));
  }
  c.residuals["zeta_spread"] = spread / c.lambda_sharp;

  Vec2 dir = opt.fd_direction.norm() > 0 ? opt.fd_direction : lattice().k2;
  const double h = opt.fd_lambda;
  auto slope = [&](double l) { return (cone_pair(c, V, dir, l).second - c.Estar) / (l * dir.norm()); };
  c.fd_slope = 2 * slope(h / 2) - slope(h);
  c.residuals["fd_slope_rel"] = std::abs(c.fd_slope - c.lambda_sharp) / c.lambda_sharp;
  return c;
}

double theta_sharp(const DiracPointCertificate& c, const FourierPotential& W, bool* weak) {
  MatrixXc Wm = field_matrix(c.basis, W);
  cplx th = c.Phi1.dot(Wm * c.Phi1);
  if (std::abs(th.imag()) > 1e-10) throw std::runtime_error("theta_sharp has a non-negligible imaginary part");
  if (weak) *weak = std::abs(th.real()) < 1e-8;
  return th.real();
}

double vertex_gap(const DiracPointCertificate& c, const FourierPotential& V, const FourierPotential& W, double s) {
  MatrixXc H = assemble_matrix(c.Kstar, c.basis, {{c.eps, &V}, {s, &W}});
  auto ep = hermitian_eigen<cplx>(H, c.bstar - 1, c.bstar + 1, false);
  return ep.values(1) - ep.values(0);
}

nlohmann::json certificate_json(const DiracPointCertificate& c, bool with_vectors) {
  nlohmann::json j;
  j["K"] = {{"n1_over_3", c.K3.n1}, {"n2_over_3", c.K3.n2}, {"cartesian", {c.Kstar.x(), c.Kstar.y()}}};
  j["eps"] = c.eps;
  j["E_star"] = c.Estar;
  j["b_star"] = c.bstar;
  j["cutoff_N"] = c.N;
  j["basis_dim"] = c.basis.dim();
  j["lambda_sharp"] = c.lambda_sharp;
  j["fd_slope"] = c.fd_slope;
  j["residuals"] = c.residuals;
  if (with_vectors) {
    auto vec = [&](const VectorXc& v) {
      nlohmann::json a = nlohmann::json::array();
      for (int i = 0; i < v.size(); ++i) a.push_back({c.basis.idx[i][0], c.basis.idx[i][1], v(i).real(), v(i).imag()});
      return a;
    };
    j["Phi1"] = vec(c.Phi1);
    j["Phi2"] = vec(c.Phi2);
  }
  return j;
}

}  // namespace hexedge
