#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hexedge/lattice.hpp"
#include "hexedge/linalg.hpp"
#include "hexedge/potential.hpp"

namespace hexedge {

// Finite set of reciprocal vectors m1 g1 + m2 g2. A potential index w (in the k1, k2 basis)
// corresponds to the basis offset map * w, which is integral because (g1, g2) spans the
// dual lattice or a refinement of it.
struct PlaneWaveBasis {
  Vec2 g1, g2;
  Eigen::Matrix2i map = Eigen::Matrix2i::Identity();
  int cutoff = 0;
  std::vector<Index2> idx;

  int dim() const { return static_cast<int>(idx.size()); }
  int find(const Index2& m) const;
  Vec2 vec(int i) const { return idx[i][0] * g1 + idx[i][1] * g2; }
  Index2 offset(const Index2& w) const {
    return {map(0, 0) * w[0] + map(0, 1) * w[1], map(1, 0) * w[0] + map(1, 1) * w[1]};
  }

  // |m1|, |m2| <= N in the (k1, k2) basis
  static PlaneWaveBasis box(int N);
  // |m1| <= N1, |m2| <= N2 in the frame basis (K1, K2)
  static PlaneWaveBasis frame_box(const EdgeFrame& f, int N1, int N2);
  // all G with |k + G| <= N q sqrt(3)/2; closed under the rotation action when k is a BZ vertex
  static PlaneWaveBasis disk(const Vec2& k, int N);
  // arbitrary generators and index list
  static PlaneWaveBasis custom(const Vec2& g1, const Vec2& g2, const Eigen::Matrix2i& map, std::vector<Index2> idx);

 private:
  std::map<Index2, int> lookup_;
  void build_lookup();
};

struct BlochOperator {
  Vec2 k;
  double eps = 0;
  PlaneWaveBasis basis;
  MatrixXc H;
};

struct PotentialTerm {
  cplx scale;
  const FourierPotential* field;
};

// |k + G_m|^2 delta_{mm'} + sum_terms scale * f_{m - m'}
MatrixXc assemble_matrix(const Vec2& k, const PlaneWaveBasis& basis, const std::vector<PotentialTerm>& terms);
// Multiplication by a field in coefficient space.
MatrixXc field_matrix(const PlaneWaveBasis& basis, const FourierPotential& f);

BlochOperator assemble(double eps, const FourierPotential& V, const Vec2& k, int N);
BlochOperator assemble(double eps, const FourierPotential& V, const Vec2& k, const PlaneWaveBasis& basis);

// Lowest nbands eigenpairs; verifies the residual and orthonormality contract.
EigenPairs<cplx> eigensolve(const MatrixXc& H, int nbands);
EigenPairs<cplx> eigensolve(const BlochOperator& op, int nbands);

struct BandSlice {
  EdgeFrame frame;
  Vec2 base;
  std::vector<double> lambdas;
  std::vector<std::vector<double>> energies;
};

std::vector<double> lambda_grid(int nlambda);

struct SliceOptions {
  int N = 8;
  double w_scale = 0;                 // adds w_scale * W to the operator
  const FourierPotential* W = nullptr;
  int threads = 1;
};

std::vector<double> slice_energies(double eps, const FourierPotential& V, const Vec2& k, int nbands,
                                   const SliceOptions& opt);
BandSlice band_slice(double eps, const FourierPotential& V, const EdgeFrame& frame, const Vec2& base, int nlambda,
                     int nbands, const SliceOptions& opt = {});
BandSlice band_slice_at(double eps, const FourierPotential& V, const EdgeFrame& frame, const Vec2& base,
                        std::vector<double> lambdas, int nbands, const SliceOptions& opt = {});

struct SurfacePoint {
  Vec2 k;
  std::vector<double> energies;
};
std::vector<SurfacePoint> dispersion_surface(double eps, const FourierPotential& V, const std::vector<Vec2>& grid,
                                             int nbands, int N = 8, int threads = 1);

std::string fmt12(double x);
void write_slice_csv(std::ostream& os, const BandSlice& s);
void write_surface_csv(std::ostream& os, const std::vector<SurfacePoint>& s);

}  // namespace hexedge
