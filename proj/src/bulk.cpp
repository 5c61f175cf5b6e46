#include "hexedge/bulk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "hexedge/parallel.hpp"

namespace hexedge {

int PlaneWaveBasis::find(const Index2& m) const {
  auto it = lookup_.find(m);
  return it == lookup_.end() ? -1 : it->second;
}

void PlaneWaveBasis::build_lookup() {
  lookup_.clear();
  for (int i = 0; i < dim(); ++i) lookup_[idx[i]] = i;
}

PlaneWaveBasis PlaneWaveBasis::box(int N) {
  if (N < 0) throw std::invalid_argument("plane-wave cutoff must be nonnegative");
  PlaneWaveBasis b;
  b.g1 = lattice().k1;
  b.g2 = lattice().k2;
  b.cutoff = N;
  for (int m1 = -N; m1 <= N; ++m1)
    for (int m2 = -N; m2 <= N; ++m2) b.idx.push_back({m1, m2});
  b.build_lookup();
  return b;
}

PlaneWaveBasis PlaneWaveBasis::frame_box(const EdgeFrame& f, int N1, int N2) {
  PlaneWaveBasis b;
  b.g1 = f.K1;
  b.g2 = f.K2;
  b.map << f.a1, f.b1, f.a2, f.b2;
  b.cutoff = std::max(N1, N2);
  for (int m1 = -N1; m1 <= N1; ++m1)
    for (int m2 = -N2; m2 <= N2; ++m2) b.idx.push_back({m1, m2});
  b.build_lookup();
  return b;
}

PlaneWaveBasis PlaneWaveBasis::disk(const Vec2& k, int N) {
  PlaneWaveBasis b;
  b.g1 = lattice().k1;
  b.g2 = lattice().k2;
  b.cutoff = N;
  const double r = N * lattice().q * std::sqrt(3.0) / 2;
  const int M = 2 * N + 3;
  for (int m1 = -M; m1 <= M; ++m1)
    for (int m2 = -M; m2 <= M; ++m2)
      if ((k + m1 * b.g1 + m2 * b.g2).norm() <= r * (1 + 1e-12)) b.idx.push_back({m1, m2});
  b.build_lookup();
  return b;
}

PlaneWaveBasis PlaneWaveBasis::custom(const Vec2& g1, const Vec2& g2, const Eigen::Matrix2i& map,
                                      std::vector<Index2> idx) {
  PlaneWaveBasis b;
  b.g1 = g1;
  b.g2 = g2;
  b.map = map;
  b.idx = std::move(idx);
  for (const auto& m : b.idx) b.cutoff = std::max({b.cutoff, std::abs(m[0]), std::abs(m[1])});
  b.build_lookup();
  return b;
}

MatrixXc assemble_matrix(const Vec2& k, const PlaneWaveBasis& basis, const std::vector<PotentialTerm>& terms) {
  const int d = basis.dim();
  MatrixXc H = MatrixXc::Zero(d, d);
  for (int i = 0; i < d; ++i) H(i, i) = (k + basis.vec(i)).squaredNorm();
  for (const auto& t : terms) {
    if (t.scale == cplx(0)) continue;
    for (const auto& [w, c] : t.field->coeffs) {
      Index2 off = basis.offset(w);
      for (int i = 0; i < d; ++i) {
        int j = basis.find({basis.idx[i][0] - off[0], basis.idx[i][1] - off[1]});
        if (j >= 0) H(i, j) += t.scale * c;
      }
    }
  }
  return H;
}

MatrixXc field_matrix(const PlaneWaveBasis& basis, const FourierPotential& f) {
  const int d = basis.dim();
  MatrixXc M = MatrixXc::Zero(d, d);
  for (const auto& [w, c] : f.coeffs) {
    Index2 off = basis.offset(w);
    for (int i = 0; i < d; ++i) {
      int j = basis.find({basis.idx[i][0] - off[0], basis.idx[i][1] - off[1]});
      if (j >= 0) M(i, j) += c;
    }
  }
  return M;
}

BlochOperator assemble(double eps, const FourierPotential& V, const Vec2& k, const PlaneWaveBasis& basis) {
  BlochOperator op;
  op.k = k;
  op.eps = eps;
  op.basis = basis;
  op.H = assemble_matrix(k, basis, {{eps, &V}});
  return op;
}

BlochOperator assemble(double eps, const FourierPotential& V, const Vec2& k, int N) {
  if (N < V.max_index() + 1)
    throw std::invalid_argument("cutoff N=" + std::to_string(N) + " too small for potential harmonics up to " +
                                std::to_string(V.max_index()));
  return assemble(eps, V, k, PlaneWaveBasis::box(N));
}

EigenPairs<cplx> eigensolve(const MatrixXc& H, int nbands) {
  if (nbands < 1 || nbands > H.rows()) throw std::invalid_argument("nbands must lie in [1, dim]");
  auto ep = hermitian_eigen<cplx>(H, 0, nbands, true);
  if (ep.values.size() != nbands) throw std::runtime_error("eigensolver failed to converge");
  double hn = H.cwiseAbs().rowwise().sum().maxCoeff();
  double res = max_residual<cplx>(H, ep.values, ep.vectors);
  double orth = orthonormality_error<cplx>(ep.vectors);
  if (res > 1e-9 * std::max(hn, 1.0) || orth > 1e-10)
    throw std::runtime_error("eigensolver failed to converge (residual " + std::to_string(res) + ", orthogonality " +
                             std::to_string(orth) + ")");
  return ep;
}

EigenPairs<cplx> eigensolve(const BlochOperator& op, int nbands) { return eigensolve(op.H, nbands); }

std::vector<double> lambda_grid(int n) {
  if (n < 2) throw std::invalid_argument("lambda grid needs at least 2 points");
  std::vector<double> l(n);
  if (n % 2 == 1)
    for (int i = 0; i < n; ++i) l[i] = -0.5 + double(i) / (n - 1);
  else
    for (int i = 0; i < n; ++i) l[i] = -0.5 + double(i + 1) / n;
  l[(n % 2 == 1) ? (n - 1) / 2 : n / 2 - 1] = 0.0;
  return l;
}

std::vector<double> slice_energies(double eps, const FourierPotential& V, const Vec2& k, int nbands,
                                   const SliceOptions& opt) {
  std::vector<PotentialTerm> terms{{eps, &V}};
  if (opt.W && opt.w_scale != 0) terms.push_back({opt.w_scale, opt.W});
  MatrixXc H = assemble_matrix(k, PlaneWaveBasis::box(opt.N), terms);
  auto ep = hermitian_eigen<cplx>(H, 0, nbands, false);
  return {ep.values.data(), ep.values.data() + ep.values.size()};
}

BandSlice band_slice_at(double eps, const FourierPotential& V, const EdgeFrame& frame, const Vec2& base,
                        std::vector<double> lambdas, int nbands, const SliceOptions& opt) {
  if (opt.N < V.max_index() + 1) throw std::invalid_argument("cutoff too small for potential");
  BandSlice s;
  s.frame = frame;
  s.base = base;
  s.lambdas = std::move(lambdas);
  s.energies = parallel_map<std::vector<double>>(static_cast<int>(s.lambdas.size()), opt.threads, [&](int i) {
    return slice_energies(eps, V, base + s.lambdas[i] * frame.K2, nbands, opt);
  });
  return s;
}

BandSlice band_slice(double eps, const FourierPotential& V, const EdgeFrame& frame, const Vec2& base, int nlambda,
                     int nbands, const SliceOptions& opt) {
  return band_slice_at(eps, V, frame, base, lambda_grid(nlambda), nbands, opt);
}

std::vector<SurfacePoint> dispersion_surface(double eps, const FourierPotential& V, const std::vector<Vec2>& grid,
                                             int nbands, int N, int threads) {
  SliceOptions opt;
  opt.N = N;
  return parallel_map<SurfacePoint>(static_cast<int>(grid.size()), threads, [&](int i) {
    return SurfacePoint{grid[i], slice_energies(eps, V, grid[i], nbands, opt)};
  });
}

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

void write_slice_csv(std::ostream& os, const BandSlice& s) {
  os << "lambda,band,energy\n";
  for (size_t i = 0; i < s.lambdas.size(); ++i)
    for (size_t b = 0; b < s.energies[i].size(); ++b)
      os << fmt12(s.lambdas[i]) << ',' << b + 1 << ',' << fmt12(s.energies[i][b]) << '\n';
}

void write_surface_csv(std::ostream& os, const std::vector<SurfacePoint>& s) {
  os << "kx,ky,band,energy\n";
  for (const auto& p : s)
    for (size_t b = 0; b < p.energies.size(); ++b)
      os << fmt12(p.k.x()) << ',' << fmt12(p.k.y()) << ',' << b + 1 << ',' << fmt12(p.energies[b]) << '\n';
}

}  // namespace hexedge
