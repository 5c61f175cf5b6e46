#include "hexedge/edge.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "hexedge/nofold.hpp"
#include "hexedge/parallel.hpp"

namespace hexedge {

namespace {

std::mutex fftw_mutex;  // the FFTW planner is not thread-safe

// forward (sign = -1) or backward (+1) unnormalized DFT
std::vector<cplx> dft(std::vector<cplx> in, int sign) {
  const int n = static_cast<int>(in.size());
  std::vector<cplx> out(n);
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lk(fftw_mutex);
    p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()),
                         sign, FFTW_ESTIMATE);
  }
  fftw_execute(p);
  {
    std::lock_guard<std::mutex> lk(fftw_mutex);
    fftw_destroy_plan(p);
  }
  return out;
}

long next_pow2(long n) {
  long p = 1;
  while (p < n) p <<= 1;
  return p;
}

double circ_dist(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

// i^k for integer k
int ipow_sign(long k, bool* imaginary) {
  long m = ((k % 4) + 4) % 4;
  *imaginary = (m % 2) == 1;
  return (m == 0 || m == 1) ? 1 : -1;
}

}  // namespace

// ---------------------------------------------------------------- wall profile

static double shape_ext(const DomainWall& w, double z) {
  if (w.kind == WallKind::Tabulated) {
    if (z < w.zmin) return -1;
    if (z > w.zmax) return 1;
  }
  return w.shape(z);
}

double WallProfile::eval(double zeta) const {
  double z = std::fmod(zeta, L);
  if (z < 0) z += L;
  return wall.kappa_inf * (shape_ext(wall, z - L / 4) - shape_ext(wall, z - 3 * L / 4) - 1);
}

double WallProfile::fourier_eval(double y) const {
  cplx s = 0;
  for (long n = -nmax; n <= nmax; ++n) s += hat(n) * std::exp(cplx(0, 2 * kPi * n * y / NT));
  return s.real();
}

int supercell_cells(double delta, double scale, int multiple) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  long n = std::max<long>(32, static_cast<long>(std::ceil(scale / delta - 1e-9)));
  return static_cast<int>((n + multiple - 1) / multiple * multiple);
}

WallProfile periodicize_wall(const DomainWall& wall, double delta, int NT, int nmax) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  if (NT < 2 || NT % 2) throw std::invalid_argument("supercell cell count must be even");
  if (NT < 16 / delta - 1e-9) throw std::invalid_argument("supercell too small for wall width at this δ");
  if (wall.kind == WallKind::Tabulated &&
      (std::abs(wall(wall.zmin) + wall.kappa_inf) > 1e-6 || std::abs(wall(wall.zmax) - wall.kappa_inf) > 1e-6))
    throw std::invalid_argument("tabulated wall does not reach its asymptotes within its sample range");
  WallProfile p;
  p.wall = wall;
  p.delta = delta;
  p.NT = NT;
  p.L = 2 * kPi * delta * NT;
  if (std::abs(p.eval(0) + wall.kappa_inf) > 1e-6 || std::abs(p.eval(p.L / 2) - wall.kappa_inf) > 1e-6)
    throw std::invalid_argument("supercell too small for wall width at this δ");
  p.nmax = std::max(nmax, 4 * NT);
  const long nq = next_pow2(std::max<long>(4096, 8L * (p.nmax + 1)));
  std::vector<cplx> s(nq);
  for (long j = 0; j < nq; ++j) s[j] = p.eval(p.L * static_cast<double>(j) / nq);
  auto c = dft(std::move(s), FFTW_FORWARD);
  p.coeff.resize(2 * p.nmax + 1);
  double imag = 0, even = 0;
  for (long n = -p.nmax; n <= p.nmax; ++n) {
    cplx v = c[(n + nq) % nq] / static_cast<double>(nq);
    p.coeff[n + p.nmax] = v;
    imag = std::max(imag, std::abs(v.imag()));
    if (n % 2 == 0) even = std::max(even, std::abs(v));
  }
  p.real_odd = imag < 1e-12 * wall.kappa_inf && even < 1e-12 * wall.kappa_inf;
  if (p.real_odd)
    for (long n = -p.nmax; n <= p.nmax; ++n) p.coeff[n + p.nmax] = (n % 2 == 0) ? 0.0 : p.coeff[n + p.nmax].real();
  return p;
}

// ---------------------------------------------------------------- dense strip

static void check_cutoffs(const StripModel& m) {
  if (m.NT < 2 || m.NT % 2) throw std::invalid_argument("supercell cell count must be even");
  for (const auto* f : {&m.V, &m.W})
    for (const auto& [w, c] : f->coeffs) {
      Index2 fc = m.frame.to_frame(w);
      if (std::abs(fc[0]) > m.N1 || std::abs(fc[1]) > m.P)
        throw std::invalid_argument("strip cutoffs do not contain the potential harmonics");
    }
}

MatrixXc assemble_strip(const StripModel& m, double kpar, long m2min, long m2max) {
  check_cutoffs(m);
  StripLayout lay{m.N1, m2min, m2max, m.NT};
  const long n2 = lay.n2();
  const long dim = lay.dim();
  const Vec2 k0 = kpar / (2 * kPi) * m.frame.K1;
  MatrixXc H = MatrixXc::Zero(dim, dim);
  auto at = [&](long m1, long m2) { return (m1 + m.N1) * n2 + (m2 - m2min); };
  for (long m1 = -m.N1; m1 <= m.N1; ++m1)
    for (long m2 = m2min; m2 <= m2max; ++m2) {
      Vec2 g = k0 + m1 * m.frame.K1 + (static_cast<double>(m2) / m.NT) * m.frame.K2;
      H(at(m1, m2), at(m1, m2)) = g.squaredNorm();
    }
  for (const auto& [w, c] : m.V.coeffs) {
    Index2 fc = m.frame.to_frame(w);
    for (long m1 = -m.N1; m1 <= m.N1; ++m1) {
      long q1 = m1 - fc[0];
      if (q1 < -m.N1 || q1 > m.N1) continue;
      for (long m2 = m2min; m2 <= m2max; ++m2) {
        long q2 = m2 - static_cast<long>(m.NT) * fc[1];
        if (q2 < m2min || q2 > m2max) continue;
        H(at(m1, m2), at(q1, q2)) += m.eps * c;
      }
    }
  }
  if (m.delta != 0 && !m.W.empty()) {
    int c2max = 0;
    for (const auto& [w, c] : m.W.coeffs) c2max = std::max(c2max, std::abs(m.frame.to_frame(w)[1]));
    WallProfile prof = periodicize_wall(m.wall, m.delta, m.NT, static_cast<int>(n2 + m.NT * c2max + 1));
    for (const auto& [w, c] : m.W.coeffs) {
      Index2 fc = m.frame.to_frame(w);
      for (long m1 = -m.N1; m1 <= m.N1; ++m1) {
        long q1 = m1 - fc[0];
        if (q1 < -m.N1 || q1 > m.N1) continue;
        for (long m2 = m2min; m2 <= m2max; ++m2)
          for (long q2 = m2min; q2 <= m2max; ++q2)
            H(at(m1, m2), at(q1, q2)) += m.delta * c * prof.hat(m2 - q2 - static_cast<long>(m.NT) * fc[1]);
      }
    }
  }
  return H;
}

MatrixXc assemble_strip(const StripModel& m, double kpar) {
  const long n2 = m.dense_N2();
  return assemble_strip(m, kpar, -n2, n2);
}

std::vector<double> strip_bulk_oracle(const StripModel& m, double kpar, int bands, int N) {
  SliceOptions so;
  so.N = N;
  std::vector<double> all;
  const Vec2 k0 = kpar / (2 * kPi) * m.frame.K1;
  for (int r = -m.NT / 2; r < m.NT / 2; ++r) {
    auto e = slice_energies(m.eps, m.V, k0 + (static_cast<double>(r) / m.NT) * m.frame.K2, bands, so);
    all.insert(all.end(), e.begin(), e.end());
  }
  std::sort(all.begin(), all.end());
  return all;
}

// ---------------------------------------------------------------- reduced strip

ReducedStrip::ReducedStrip(const StripModel& m, double kpar, int threads) : model_(m), kpar_(kpar), threads_(threads) {
  check_cutoffs(m);
  const int NT = m.NT;
  cell_ = PlaneWaveBasis::frame_box(m.frame, m.N1, m.P);
  const int nc = cell_.dim();
  layout_ = StripLayout{m.N1, -NT / 2 - static_cast<long>(NT) * m.P, NT / 2 - 1 + static_cast<long>(NT) * m.P, NT};

  bool v_real = true, w_imag = true;
  for (const auto& [w, c] : m.V.coeffs) v_real = v_real && std::abs(c.imag()) <= 1e-14 * std::max(1.0, std::abs(c));
  for (const auto& [w, c] : m.W.coeffs) w_imag = w_imag && std::abs(c.real()) <= 1e-14 * std::max(1.0, std::abs(c));
  const bool coupled = m.delta != 0 && !m.W.empty();
  if (coupled) {
    int c2max = 0;
    for (const auto& [w, c] : m.W.coeffs) c2max = std::max(c2max, std::abs(m.frame.to_frame(w)[1]));
    prof_ = periodicize_wall(m.wall, m.delta, NT, NT * (2 * m.P + c2max + 1) + 1);
  }
  real_ = v_real && w_imag && NT % 4 == 0 && (!coupled || prof_.real_odd);

  const Vec2 k0 = kpar / (2 * kPi) * m.frame.K1;
  const MatrixXc Wc = m.W.empty() ? MatrixXc::Zero(nc, nc) : field_matrix(cell_, m.W);
  B_.resize(NT);
  energies_.resize(NT);
  std::vector<MatrixXc> Hp(NT);
  parallel_for(NT, threads_, [&](int t) {
    const int r = t - NT / 2;
    MatrixXc H = assemble_matrix(k0 + (static_cast<double>(r) / NT) * m.frame.K2, cell_, {{m.eps, &m.V}});
    const int nb = m.full ? nc : std::min(m.bands, nc);
    MatrixXc B;
    if (real_) {
      Mat<double> Hr = H.real();
      auto ep = hermitian_eigen<double>(Hr, 0, nb, true);
      B = ep.vectors.cast<cplx>();
      energies_[t] = ep.values;
    } else {
      auto ep = hermitian_eigen<cplx>(H, 0, nb, true);
      B = ep.vectors;
      energies_[t] = ep.values;
    }
    const int ne = m.full || m.W.empty() ? 0 : std::min(m.enrich, nb);
    if (ne > 0 && nb < nc) {
      MatrixXc X = Wc * B.leftCols(ne);
      if (real_) X = (X * cplx(0, -1)).real().cast<cplx>();  // W = i R with R real
      for (int pass = 0; pass < 2; ++pass) X -= B * (B.adjoint() * X);
      Eigen::HouseholderQR<MatrixXc> qr(X);
      MatrixXc Q = qr.householderQ() * MatrixXc::Identity(nc, ne);
      MatrixXc R = qr.matrixQR().topRows(ne).triangularView<Eigen::Upper>();
      std::vector<int> keep;
      for (int j = 0; j < ne; ++j)
        if (std::abs(R(j, j)) > 1e-8 * std::max(1.0, X.col(j).norm())) keep.push_back(j);
      MatrixXc B2(nc, nb + static_cast<int>(keep.size()));
      B2.leftCols(nb) = B;
      for (size_t j = 0; j < keep.size(); ++j) B2.col(nb + j) = Q.col(keep[j]);
      if (real_) B2 = B2.real().cast<cplx>();
      // second orthonormalization pass keeps B2 orthonormal to rounding
      Eigen::HouseholderQR<MatrixXc> qr2(B2);
      MatrixXc Q2 = qr2.householderQ() * MatrixXc::Identity(nc, B2.cols());
      Eigen::VectorXd sg = qr2.matrixQR().diagonal().real().cwiseSign();
      B = Q2 * sg.cast<cplx>().asDiagonal();
      if (real_) B = B.real().cast<cplx>();
    }
    B_[t] = B;
    Hp[t] = B.adjoint() * H * B;
  });
  Hp_ = std::move(Hp);
  offset_.assign(NT + 1, 0);
  for (int t = 0; t < NT; ++t) offset_[t + 1] = offset_[t] + B_[t].cols();
}

template <class S>
Mat<S> ReducedStrip::build() const {
  const int NT = model_.NT;
  const long n = dim();
  Mat<S> H = Mat<S>::Zero(n, n);
  for (int t = 0; t < NT; ++t) {
    if constexpr (std::is_same_v<S, double>) H.block(offset_[t], offset_[t], B_[t].cols(), B_[t].cols()) = Hp_[t].real();
    else H.block(offset_[t], offset_[t], B_[t].cols(), B_[t].cols()) = Hp_[t];
  }
  if (model_.delta == 0 || model_.W.empty()) return H;

  struct Term {
    int c1, c2;
    cplx w;
  };
  std::vector<Term> terms;
  double wmax = 0;
  for (const auto& [w, c] : model_.W.coeffs) {
    Index2 fc = model_.frame.to_frame(w);
    terms.push_back({fc[0], fc[1], c});
    wmax = std::max(wmax, std::abs(c));
  }
  const double cut = 1e-16 * wmax * std::abs(model_.wall.kappa_inf);
  const int nc = cell_.dim();
  const int P = model_.P;
  const double delta = model_.delta;

  parallel_for(NT, threads_, [&](int d) {
    if constexpr (std::is_same_v<S, double>)
      if (d % 2 == 0) return;  // kappa_hat vanishes at even index in the real form
    // C_d(i, j) = sum_w W_w kappa_hat_{NT (p - p' - c2) + d} [m1 - m1' = c1]
    struct Entry {
      int i, j;
      S v;
    };
    std::vector<Entry> C;
    for (int i = 0; i < nc; ++i) {
      const Index2& a = cell_.idx[i];
      for (const auto& tm : terms) {
        int q1 = a[0] - tm.c1;
        if (q1 < -model_.N1 || q1 > model_.N1) continue;
        for (int q2 = -P; q2 <= P; ++q2) {
          cplx v = tm.w * prof_.hat(static_cast<long>(NT) * (a[1] - q2 - tm.c2) + d);
          if (std::abs(v) <= cut) continue;
          int j = cell_.find({q1, q2});
          if constexpr (std::is_same_v<S, double>) C.push_back({i, j, (v * cplx(0, -1)).real()});
          else C.push_back({i, j, v});
        }
      }
    }
    if (C.empty()) return;
    double phase = 1;
    if constexpr (std::is_same_v<S, double>) {
      bool im;
      phase = ipow_sign(1 - d, &im);
    }
    for (int t = d; t < NT; ++t) {
      const int tp = t - d;
      Mat<S> Bp, Bt;
      if constexpr (std::is_same_v<S, double>) {
        Bp = B_[tp].real();
        Bt = B_[t].real();
      } else {
        Bp = B_[tp];
        Bt = B_[t];
      }
      Mat<S> Y = Mat<S>::Zero(nc, Bp.cols());
      for (const auto& e : C) Y.row(e.i) += e.v * Bp.row(e.j);
      Mat<S> blk = (delta * phase) * (Bt.adjoint() * Y);
      H.block(offset_[t], offset_[tp], Bt.cols(), Bp.cols()) += blk;
    }
  });
  return H;
}

Mat<double> ReducedStrip::real_matrix() const {
  if (!real_) throw std::logic_error("strip has no real form");
  return build<double>();
}

Mat<cplx> ReducedStrip::complex_matrix() const {
  if (real_) {
    // the real form is unitarily equivalent; undo the block phases
    Mat<double> Hr = build<double>();
    Mat<cplx> H = Hr.cast<cplx>();
    const int NT = model_.NT;
    for (int t = 0; t < NT; ++t)
      for (int u = 0; u <= t; ++u) {
        bool im;
        int s = ipow_sign((t - NT / 2) - (u - NT / 2), &im);
        cplx ph = im ? cplx(0, s) : cplx(s, 0);
        H.block(offset_[t], offset_[u], B_[t].cols(), B_[u].cols()) *= ph;  // i^r H~ i^-r'
      }
    return H;
  }
  return build<cplx>();
}

template <class S>
static VectorXc expand_impl(const Vec<S>& y, const std::vector<MatrixXc>& B, const std::vector<long>& off,
                            const PlaneWaveBasis& cell, const StripLayout& lay, bool real) {
  const int NT = lay.NT;
  VectorXc c = VectorXc::Zero(lay.dim());
  const long n2 = lay.n2();
  for (int t = 0; t < NT; ++t) {
    const int r = t - NT / 2;
    VectorXc yt = y.segment(off[t], B[t].cols()).template cast<cplx>();
    VectorXc z = B[t] * yt;
    if (real) {
      bool im;
      int s = ipow_sign(r, &im);
      z *= im ? cplx(0, s) : cplx(s, 0);
    }
    for (int i = 0; i < cell.dim(); ++i) {
      long m1 = cell.idx[i][0], m2 = static_cast<long>(NT) * cell.idx[i][1] + r;
      c((m1 + lay.N1) * n2 + (m2 - lay.m2min)) = z(i);
    }
  }
  return c;
}

VectorXc ReducedStrip::expand(const Vec<double>& y) const {
  return expand_impl<double>(y, B_, offset_, cell_, layout_, real_);
}
VectorXc ReducedStrip::expand(const Vec<cplx>& y) const {
  return expand_impl<cplx>(y, B_, offset_, cell_, layout_, false);
}

// ---------------------------------------------------------------- densities

DensityInfo transverse_density(const VectorXc& c, const StripLayout& lay) {
  const long n2 = lay.n2();
  const int NT = lay.NT;
  const long nf = next_pow2(2 * n2);
  std::vector<cplx> F(nf, 0.0);
  for (long row = 0; row < 2L * lay.N1 + 1; ++row) {
    std::vector<cplx> a(nf, 0.0);
    for (long j = 0; j < n2; ++j) a[j] = c(row * n2 + j);
    auto A = dft(std::move(a), FFTW_FORWARD);
    for (auto& x : A) x = std::norm(x);
    auto R = dft(std::move(A), FFTW_BACKWARD);  // R[n] = nf * sum_j a_{j+n} conj(a_j)
    for (long n = 0; n < nf; ++n) F[n] += R[n] / static_cast<double>(nf);
  }
  // rho_j = sum_n F_n s(n) exp(2 pi i n j / NT), s(n) = cell average of exp(2 pi i n y / NT)
  std::vector<cplx> G(NT, 0.0);
  for (long k = -(n2 - 1); k <= n2 - 1; ++k) {
    cplx f = F[(k + nf) % nf];
    cplx s = 1;
    if (k != 0) {
      double x = 2 * kPi * k / NT;
      s = (std::exp(cplx(0, x)) - 1.0) / cplx(0, x);
    }
    G[((k % NT) + NT) % NT] += f * s;
  }
  auto rho = dft(std::move(G), FFTW_BACKWARD);
  DensityInfo d;
  d.density.resize(NT);
  double tot = 0;
  for (int j = 0; j < NT; ++j) {
    d.density[j] = rho[j].real();
    tot += d.density[j];
  }
  cplx z = 0;
  for (int j = 0; j < NT; ++j) {
    d.density[j] /= tot;
    z += d.density[j] * std::exp(cplx(0, 2 * kPi * (j + 0.5) / NT));
  }
  double ang = std::arg(z);
  if (ang < 0) ang += 2 * kPi;
  d.centroid = ang * NT / (2 * kPi);
  d.tail_mass = 0;
  for (int j = 0; j < NT; ++j)
    if (circ_dist(j + 0.5, d.centroid, NT) > NT / 4.0) d.tail_mass += d.density[j];
  return d;
}

// <a, P0 b> with P0 the restriction to cells [0, NT/2)
static cplx half_overlap(const VectorXc& a, const VectorXc& b, const StripLayout& lay) {
  const long n2 = lay.n2();
  const int NT = lay.NT;
  const long nf = next_pow2(2 * n2);
  std::vector<cplx> F(nf, 0.0);
  for (long row = 0; row < 2L * lay.N1 + 1; ++row) {
    std::vector<cplx> x(nf, 0.0), y(nf, 0.0);
    for (long j = 0; j < n2; ++j) {
      x[j] = a(row * n2 + j);
      y[j] = b(row * n2 + j);
    }
    auto X = dft(std::move(x), FFTW_FORWARD);
    auto Y = dft(std::move(y), FFTW_FORWARD);
    for (long k = 0; k < nf; ++k) X[k] = std::conj(X[k]) * Y[k];
    auto R = dft(std::move(X), FFTW_BACKWARD);  // sum_j conj(a_j) b_{j+n}
    for (long n = 0; n < nf; ++n) F[n] += R[n] / static_cast<double>(nf);
  }
  // (1/NT) int_0^{NT/2} exp(2 pi i n y / NT) dy = 1/2 (n = 0), i / (pi n) (n odd), 0 (n even)
  cplx s = 0.5 * F[0];
  for (long n = -(n2 - 1); n <= n2 - 1; ++n)
    if (n % 2 != 0) s += F[(n + nf) % nf] * cplx(0, 1.0 / (kPi * n));
  (void)NT;
  return s;
}

// ---------------------------------------------------------------- spectra

std::vector<std::pair<double, double>> strip_bulk_intervals(const StripModel& m, double kpar, int nbands, int nlambda,
                                                            int N, int threads) {
  const Vec2 base = kpar / (2 * kPi) * m.frame.K1;
  auto r = slice_band_ranges(m.eps, m.delta, m.V, m.W, m.wall.kappa_inf, m.frame, base, nbands, nlambda, N, threads);
  return merge_intervals(r);
}

int EdgeSpectrum::count_localized(int wall) const {
  int n = 0;
  for (const auto& s : states)
    if (s.localized && s.wall_index == wall) ++n;
  return n;
}

namespace {

template <class S>
struct WindowResult {
  Eigen::VectorXd values;
  Mat<S> vectors;
  double residual = 0;
};

template <class S>
WindowResult<S> window_solve(Mat<S>&& H, double emin, double emax, const EdgeOptions& opt) {
  const long n = H.rows();
  WindowResult<S> w;
  if (n <= opt.dense_limit) {
    auto ep = hermitian_eigen_window<S>(H, emin, emax, true);
    w.values = ep.values;
    w.vectors = ep.vectors;
    if (w.values.size() > 0) {
      Mat<S> HV = H.template selfadjointView<Eigen::Lower>() * w.vectors;
      for (int j = 0; j < w.values.size(); ++j)
        w.residual = std::max(w.residual, (HV.col(j) - w.values(j) * w.vectors.col(j)).norm());
    }
    return w;
  }
  // keep a copy for true residuals when it fits comfortably
  const bool keep_copy = static_cast<double>(n) * n * sizeof(S) <= 1.0e9;
  Mat<S> Hcopy;
  if (keep_copy) Hcopy = H;
  double hnorm = 0;
  for (long j = 0; j < n; ++j) hnorm += 2 * H.col(j).tail(n - j).squaredNorm() - std::norm(H(j, j));
  hnorm = std::sqrt(hnorm);
  double sigma = 0.5 * (emin + emax);
  std::unique_ptr<LdltFactor<S>> F;
  for (int attempt = 0; !F; ++attempt) {
    try {
      Mat<S> A = keep_copy ? Hcopy : std::move(H);
      F = std::make_unique<LdltFactor<S>>(std::move(A), sigma);
    } catch (const std::runtime_error&) {
      if (attempt >= 2 || !keep_copy) throw;
      sigma += 1e-7 * (emax - emin);
    }
  }
  const double R = std::max(sigma - emin, emax - sigma);
  NearestOptions no;
  no.seed = opt.seed;
  no.nev = 16;
  NearestResult<S> res;
  for (;;) {
    no.nev = static_cast<int>(std::min<long>(no.nev, n));
    res = nearest_eigenpairs<S>(*F, no);
    if (!res.converged) throw std::runtime_error("shift-invert Lanczos did not converge");
    double far = 0;
    for (int j = 0; j < res.values.size(); ++j) far = std::max(far, std::abs(res.values(j) - sigma));
    if (no.nev >= n || far > R) break;
    no.nev *= 2;
  }
  std::vector<int> keep;
  for (int j = 0; j < res.values.size(); ++j)
    if (res.values(j) > emin && res.values(j) <= emax) keep.push_back(j);
  w.values.resize(keep.size());
  w.vectors.resize(n, keep.size());
  for (size_t j = 0; j < keep.size(); ++j) {
    w.values(j) = res.values(keep[j]);
    w.vectors.col(j) = res.vectors.col(keep[j]);
    double theta = 1 / (res.values(keep[j]) - sigma);
    w.residual = std::max(w.residual, hnorm * res.residuals(keep[j]) * std::abs(theta));
  }
  if (keep_copy && w.values.size() > 0) {
    Mat<S> HV = Hcopy.template selfadjointView<Eigen::Lower>() * w.vectors;
    w.residual = 0;
    for (int j = 0; j < w.values.size(); ++j)
      w.residual = std::max(w.residual, (HV.col(j) - w.values(j) * w.vectors.col(j)).norm());
  }
  return w;
}

EdgeState make_state(double E, VectorXc c, const StripLayout& lay, double thr, bool in_gap) {
  EdgeState s;
  s.energy = E;
  auto d = transverse_density(c, lay);
  s.coefficients = std::move(c);
  s.density = std::move(d.density);
  s.centroid = d.centroid;
  s.tail_mass = d.tail_mass;
  s.in_gap = in_gap;
  s.localized = in_gap && s.tail_mass < thr;
  s.wall_index = circ_dist(s.centroid, lay.NT / 4.0, lay.NT) < lay.NT / 4.0 ? 0 : 1;
  return s;
}

}  // namespace

EdgeSpectrum edge_spectrum(const StripModel& m, double kpar, const EdgeOptions& opt) {
  EdgeSpectrum sp;
  sp.kpar = kpar;
  sp.delta = m.delta;
  sp.NT = m.NT;
  const Vec2 base = kpar / (2 * kPi) * m.frame.K1;
  const auto ranges = slice_band_ranges(m.eps, m.delta, m.V, m.W, m.wall.kappa_inf, m.frame, base, opt.bulk_bands,
                                        opt.nlambda, opt.bulk_N, opt.threads);
  sp.bulk_intervals = merge_intervals(ranges);

  double centre = opt.eref;
  if (opt.gap_band > 0) {
    if (opt.gap_band >= opt.bulk_bands) throw std::invalid_argument("gap_band must be below bulk_bands");
    double top = -INFINITY, bottom = INFINITY;
    for (int b = 0; b < opt.bulk_bands; ++b) {
      if (b < opt.gap_band) top = std::max(top, ranges[b].second);
      else bottom = std::min(bottom, ranges[b].first);
    }
    sp.has_gap = bottom > top;
    if (sp.has_gap) {
      sp.gap_lo = top;
      sp.gap_hi = bottom;
    }
    centre = 0.5 * (top + bottom);
  } else if (std::isfinite(opt.eref)) {
    double lo = -INFINITY, hi = INFINITY;
    bool inside = false;
    for (const auto& [a, b] : sp.bulk_intervals) {
      if (opt.eref >= a && opt.eref <= b) inside = true;
      if (b < opt.eref) lo = std::max(lo, b);
      if (a > opt.eref) hi = std::min(hi, a);
    }
    if (!inside && !std::isfinite(hi))
      throw std::invalid_argument("reference energy above the computed bands; raise bulk_bands");
    sp.has_gap = !inside;
    if (sp.has_gap) {
      sp.gap_lo = std::isfinite(lo) ? lo : sp.bulk_intervals.front().first - 1;
      sp.gap_hi = hi;
    }
  }
  if (std::isfinite(opt.emin) && std::isfinite(opt.emax)) {
    sp.emin = opt.emin;
    sp.emax = opt.emax;
  } else if (sp.has_gap && opt.window == EdgeWindow::Gap) {
    double w = sp.gap_hi - sp.gap_lo;
    sp.emin = sp.gap_lo - opt.margin * w;
    sp.emax = sp.gap_hi + opt.margin * w;
  } else if (sp.has_gap && opt.window == EdgeWindow::Lower) {
    sp.emin = sp.gap_lo - opt.halfwidth;
    sp.emax = sp.gap_lo + opt.halfwidth;
  } else if (sp.has_gap && opt.window == EdgeWindow::Upper) {
    sp.emin = sp.gap_hi - opt.halfwidth;
    sp.emax = sp.gap_hi + opt.halfwidth;
  } else if (std::isfinite(centre)) {
    sp.emin = centre - opt.halfwidth;
    sp.emax = centre + opt.halfwidth;
  } else if (opt.nbands <= 0) {
    throw std::invalid_argument("edge spectrum needs a window, a reference energy, or nbands");
  }

  std::vector<double> vals;
  std::vector<VectorXc> vecs;
  StripLayout lay;
  auto collect = [&](auto&& w, auto&& expand) {
    sp.max_residual = w.residual;
    for (int j = 0; j < w.values.size(); ++j) {
      vals.push_back(w.values(j));
      vecs.push_back(expand(w.vectors.col(j)));
    }
  };
  if (opt.dense) {
    MatrixXc H = assemble_strip(m, kpar);
    const long n2 = m.dense_N2();
    lay = StripLayout{m.N1, -n2, n2, m.NT};
    sp.dim = H.rows();
    sp.route = "dense";
    if (opt.nbands > 0) {
      auto ep = hermitian_eigen<cplx>(H, 0, std::min<int>(opt.nbands, H.rows()), true);
      sp.max_residual = max_residual<cplx>(H, ep.values, ep.vectors);
      for (int j = 0; j < ep.values.size(); ++j) {
        vals.push_back(ep.values(j));
        vecs.push_back(ep.vectors.col(j));
      }
    } else {
      collect(window_solve<cplx>(std::move(H), sp.emin, sp.emax, opt), [](const VectorXc& v) { return v; });
    }
  } else {
    ReducedStrip rs(m, kpar, opt.threads);
    lay = rs.layout();
    sp.dim = rs.dim();
    sp.route = rs.is_real() ? "reduced-real" : "reduced-complex";
    if (opt.nbands > 0) {
      Mat<cplx> H = rs.complex_matrix();
      auto ep = hermitian_eigen<cplx>(H, 0, std::min<int>(opt.nbands, H.rows()), true);
      for (int j = 0; j < ep.values.size(); ++j) {
        vals.push_back(ep.values(j));
        vecs.push_back(rs.expand(Vec<cplx>(ep.vectors.col(j))));
      }
      Mat<cplx> HV = H.selfadjointView<Eigen::Lower>() * ep.vectors;
      for (int j = 0; j < ep.values.size(); ++j)
        sp.max_residual = std::max(sp.max_residual, (HV.col(j) - ep.values(j) * ep.vectors.col(j)).norm());
    } else if (rs.is_real()) {
      collect(window_solve<double>(rs.real_matrix(), sp.emin, sp.emax, opt),
              [&](const auto& v) { return rs.expand(Vec<double>(v)); });
    } else {
      collect(window_solve<cplx>(rs.complex_matrix(), sp.emin, sp.emax, opt),
              [&](const auto& v) { return rs.expand(Vec<cplx>(v)); });
    }
  }
  sp.eigenvalues = vals;

  auto in_gap = [&](double e) {
    for (const auto& [a, b] : sp.bulk_intervals)
      if (e > a - 1e-6 && e < b + 1e-6) return false;
    return true;
  };
  std::vector<int> gap_idx;
  for (size_t j = 0; j < vals.size(); ++j) {
    if (in_gap(vals[j])) gap_idx.push_back(static_cast<int>(j));
    else sp.continuum.push_back(make_state(vals[j], vecs[j], lay, opt.tail_threshold, false));
  }
  // wall-resolved Rayleigh-Ritz: split the gap eigenspace by the projector onto cells [0, NT/2)
  const int k = static_cast<int>(gap_idx.size());
  if (k > 0) {
    MatrixXc Pm(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        Pm(a, b) = half_overlap(vecs[gap_idx[a]], vecs[gap_idx[b]], lay);
        Pm(b, a) = std::conj(Pm(a, b));
      }
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(Pm);
    for (int side = 0; side < 2; ++side) {
      std::vector<int> cols;
      for (int j = 0; j < k; ++j)
        if ((es.eigenvalues()(j) > 0.5) == (side == 0)) cols.push_back(j);
      if (cols.empty()) continue;
      MatrixXc U(k, cols.size());
      for (size_t j = 0; j < cols.size(); ++j) U.col(j) = es.eigenvectors().col(cols[j]);
      Eigen::VectorXd E(k);
      for (int a = 0; a < k; ++a) E(a) = vals[gap_idx[a]];
      MatrixXc Hs = U.adjoint() * E.asDiagonal() * U;
      Eigen::SelfAdjointEigenSolver<MatrixXc> hs(Hs);
      for (int j = 0; j < hs.eigenvalues().size(); ++j) {
        VectorXc y = U * hs.eigenvectors().col(j);
        VectorXc c = VectorXc::Zero(vecs[0].size());
        for (int a = 0; a < k; ++a) c += y(a) * vecs[gap_idx[a]];
        sp.states.push_back(make_state(hs.eigenvalues()(j), std::move(c), lay, opt.tail_threshold, true));
      }
    }
    std::stable_sort(sp.states.begin(), sp.states.end(),
                     [](const EdgeState& a, const EdgeState& b) { return a.energy < b.energy; });
  }
  return sp;
}

// ---------------------------------------------------------------- sweeps and branches

std::vector<Branch> track_branches(const std::vector<EdgeSpectrum>& sweep, const std::vector<double>& x,
                                   double max_jump) {
  std::vector<Branch> br;
  std::vector<int> active;  // branch ids continued at the previous grid point
  for (size_t g = 0; g < sweep.size(); ++g) {
    std::vector<int> next;
    std::vector<bool> used(br.size(), false);
    const auto& st = sweep[g].states;
    for (size_t s = 0; s < st.size(); ++s) {
      if (!st[s].localized) continue;
      std::vector<std::pair<double, int>> cand;
      for (int b : active) {
        if (used[b] || br[b].wall != st[s].wall_index) continue;
        double dE = std::abs(br[b].points.back().energy - st[s].energy);
        if (dE <= max_jump) cand.push_back({dE, b});
      }
      std::sort(cand.begin(), cand.end());
      int pick = -1;
      if (!cand.empty()) {
        pick = cand[0].second;
        if (cand.size() > 1 && cand[1].first < 2 * cand[0].first) {
          double best = 0.7;
          for (const auto& [dE, b] : cand) {
            const auto& prev = sweep[br[b].points.back().grid].states[br[b].points.back().state].coefficients;
            if (prev.size() != st[s].coefficients.size()) continue;
            double ov = std::abs(prev.dot(st[s].coefficients)) / (prev.norm() * st[s].coefficients.norm());
            if (ov >= best) {
              best = ov;
              pick = b;
            }
          }
        }
      }
      if (pick < 0) {
        br.push_back(Branch{st[s].wall_index, {}, {}});
        used.push_back(false);
        pick = static_cast<int>(br.size()) - 1;
      }
      used[pick] = true;
      br[pick].points.push_back({g, s, x[g], st[s].energy});
      next.push_back(pick);
    }
    active = next;
  }
  for (auto& b : br) {
    const auto& p = b.points;
    b.slope.assign(p.size(), NAN);
    for (size_t i = 0; i < p.size(); ++i) {
      size_t lo = i > 0 ? i - 1 : i, hi = i + 1 < p.size() ? i + 1 : i;
      if (hi > lo) b.slope[i] = (p[hi].energy - p[lo].energy) / (p[hi].x - p[lo].x);
    }
  }
  return br;
}

std::vector<EdgeSpectrum> spectrum_vs_delta(const ModelForDelta& make, double kpar, const std::vector<double>& deltas,
                                            const EdgeOptions& opt, int threads) {
  return parallel_map<EdgeSpectrum>(static_cast<int>(deltas.size()), threads,
                                    [&](int i) { return edge_spectrum(make(deltas[i]), kpar, opt); });
}

std::vector<EdgeSpectrum> spectrum_vs_kpar(const StripModel& m, const std::vector<double>& kpars,
                                           const EdgeOptions& opt, int threads) {
  return parallel_map<EdgeSpectrum>(static_cast<int>(kpars.size()), threads,
                                    [&](int i) { return edge_spectrum(m, kpars[i], opt); });
}

static std::vector<const EdgeState*> window_rows(const EdgeSpectrum& s) {
  std::vector<const EdgeState*> rows;
  for (const auto& x : s.states) rows.push_back(&x);
  for (const auto& x : s.continuum) rows.push_back(&x);
  std::stable_sort(rows.begin(), rows.end(), [](const EdgeState* a, const EdgeState* b) { return a->energy < b->energy; });
  return rows;
}

void write_delta_csv(std::ostream& os, const std::vector<EdgeSpectrum>& sweep) {
  os << "delta,eig_index,energy,localized,centroid,tail_mass\n";
  for (const auto& s : sweep) {
    auto rows = window_rows(s);
    for (size_t i = 0; i < rows.size(); ++i)
      os << fmt12(s.delta) << ',' << i << ',' << fmt12(rows[i]->energy) << ',' << (rows[i]->localized ? 1 : 0) << ','
         << fmt12(rows[i]->centroid) << ',' << fmt12(rows[i]->tail_mass) << '\n';
  }
}

void write_kpar_csv(std::ostream& os, const std::vector<EdgeSpectrum>& sweep, const std::vector<Branch>& branches) {
  std::map<std::pair<size_t, size_t>, double> vg;
  for (const auto& b : branches)
    for (size_t i = 0; i < b.points.size(); ++i) vg[{b.points[i].grid, b.points[i].state}] = b.slope[i];
  os << "kpar,eig_index,energy,localized,group_velocity\n";
  for (size_t g = 0; g < sweep.size(); ++g) {
    const auto& s = sweep[g];
    auto rows = window_rows(s);
    for (size_t i = 0; i < rows.size(); ++i) {
      os << fmt12(s.kpar) << ',' << i << ',' << fmt12(rows[i]->energy) << ',' << (rows[i]->localized ? 1 : 0) << ',';
      if (rows[i]->in_gap) {
        size_t si = static_cast<size_t>(rows[i] - s.states.data());
        auto it = vg.find({g, si});
        if (it != vg.end() && std::isfinite(it->second)) os << fmt12(it->second);
      }
      os << '\n';
    }
  }
}

void write_branches_csv(std::ostream& os, const std::vector<Branch>& branches, const std::string& xname) {
  os << xname << ",branch,wall,energy,slope\n";
  for (size_t b = 0; b < branches.size(); ++b)
    for (size_t i = 0; i < branches[b].points.size(); ++i) {
      os << fmt12(branches[b].points[i].x) << ',' << b << ',' << branches[b].wall << ','
         << fmt12(branches[b].points[i].energy) << ',';
      if (std::isfinite(branches[b].slope[i])) os << fmt12(branches[b].slope[i]);
      os << '\n';
    }
}

nlohmann::json strip_json(const StripModel& m) {
  nlohmann::json j;
  j["edge"] = {m.frame.a1, m.frame.b1};
  j["frame"] = {{"a2", m.frame.a2}, {"b2", m.frame.b2}};
  j["eps"] = m.eps;
  j["delta"] = m.delta;
  j["wall"] = m.wall.to_text();
  j["NT"] = m.NT;
  j["N1"] = m.N1;
  j["P"] = m.P;
  j["N2"] = m.dense_N2();
  j["bands"] = m.bands;
  j["enrich"] = m.enrich;
  j["full"] = m.full;
  j["wrap"] = "double_wall";
  return j;
}

double envelope_correlation(const EdgeState& s, double delta, int NT, const std::function<double(double)>& alpha2) {
  std::vector<double> a, b;
  for (int j = 0; j < NT / 2; ++j) {
    a.push_back(s.density[j]);
    b.push_back(alpha2(2 * kPi * delta * (j + 0.5 - NT / 4.0)));
  }
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace hexedge
