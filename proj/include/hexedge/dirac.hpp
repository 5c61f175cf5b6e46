#pragma once

#include <map>
#include <string>

#include "hexedge/bulk.hpp"
#include "json.hpp"

namespace hexedge {

struct DiracOptions {
  int nscan = 8;              // bands searched for a degenerate pair
  double degeneracy = 1e-6;   // eigenvalues closer than this are degenerate
  double fd_lambda = 1e-3;    // finite-difference step for the cone slope
  Vec2 fd_direction = Vec2::Zero();  // zero: use k2
  unsigned seed = 2024;       // random directions for the zeta-independence check
};

struct DiracPointCertificate {
  Third K3;
  Vec2 Kstar;
  double Estar = 0;
  int bstar = 0;  // 1-based: bands bstar and bstar + 1 meet
  int N = 0;
  double eps = 0;
  PlaneWaveBasis basis;
  VectorXc Phi1, Phi2;
  Eigen::Vector2cd grad_element;  // <Phi2, d_j Phi1>, j = x, y
  double lambda_sharp = 0;
  double fd_slope = 0;
  std::map<std::string, double> residuals;
};

// f(x) -> f(R* x) on coefficients of L^2_K functions.
VectorXc rotation_action(const Third& K, const PlaneWaveBasis& basis, const VectorXc& c);

DiracPointCertificate certify_dirac(double eps, const FourierPotential& V, const Third& K, int N = 8,
                                    const DiracOptions& opt = {});

// <Phi1, W Phi1>; sets *weak when |theta| < 1e-8.
double theta_sharp(const DiracPointCertificate& cert, const FourierPotential& W, bool* weak = nullptr);

// 2 |<Phi2, zeta . grad Phi1>| for a direction zeta.
double lambda_sharp_along(const DiracPointCertificate& cert, const Eigen::Vector2cd& zeta);

// E_{bstar+1} - E_{bstar} of H^(eps,0) + s W at K.
double vertex_gap(const DiracPointCertificate& cert, const FourierPotential& V, const FourierPotential& W, double s);

// Bands bstar, bstar+1 at K + lambda * dir (same basis as the certificate).
std::pair<double, double> cone_pair(const DiracPointCertificate& cert, const FourierPotential& V, const Vec2& dir,
                                    double lambda);

// Phase convention: the largest coefficient (first in basis order among ties) is real positive.
VectorXc fix_phase(const VectorXc& v);

nlohmann::json certificate_json(const DiracPointCertificate& c, bool with_vectors = false);

}  // namespace hexedge
