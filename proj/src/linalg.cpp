#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "hexedge/linalg.hpp"

extern "C" void openblas_set_num_threads(int);

namespace hexedge {

using cd = std::complex<double>;

void pin_blas_threads() { openblas_set_num_threads(1); }

namespace {

void check_info(int info, const char* what) {
  if (info != 0) throw std::runtime_error(std::string(what) + " failed, info = " + std::to_string(info));
}

// S = double -> dsyevr, S = complex -> zheevr
int syevr(char jobz, char range, int n, double* a, double vl, double vu, int il, int iu, int* m, double* w, double* z,
          int* isuppz) {
  return LAPACKE_dsyevr(LAPACK_COL_MAJOR, jobz, range, 'L', n, a, n, vl, vu, il, iu, 0.0, m, w, z, n, isuppz);
}
int syevr(char jobz, char range, int n, cd* a, double vl, double vu, int il, int iu, int* m, double* w, cd* z,
          int* isuppz) {
  return LAPACKE_zheevr(LAPACK_COL_MAJOR, jobz, range, 'L', n, a, n, vl, vu, il, iu, 0.0, m, w, z, n, isuppz);
}
// bounded Bunch-Kaufman; the factor is stored ready for level-3 solves (D in the diagonal, e aside)
int sytrf(int n, double* a, double* e, int* ipiv) { return LAPACKE_dsytrf_rk(LAPACK_COL_MAJOR, 'L', n, a, n, e, ipiv); }
int sytrf(int n, cd* a, cd* e, int* ipiv) { return LAPACKE_zhetrf_rk(LAPACK_COL_MAJOR, 'L', n, a, n, e, ipiv); }
int sytrs(int n, int nrhs, const double* a, const double* e, const int* ipiv, double* b) {
  return LAPACKE_dsytrs_3(LAPACK_COL_MAJOR, 'L', n, nrhs, a, n, e, ipiv, b, n);
}
int sytrs(int n, int nrhs, const cd* a, const cd* e, const int* ipiv, cd* b) {
  return LAPACKE_zhetrs_3(LAPACK_COL_MAJOR, 'L', n, nrhs, a, n, e, ipiv, b, n);
}

template <class S>
EigenPairs<S> run_syevr(const Mat<S>& H, char range, double vl, double vu, int il, int iu, bool vectors) {
  const int n = static_cast<int>(H.rows());
  EigenPairs<S> out;
  if (n == 0) return out;
  Mat<S> A = H;
  Eigen::VectorXd w(n);
  int ncols = range == 'I' ? iu - il + 1 : n;
  Mat<S> Z(n, vectors ? std::max(ncols, 1) : 1);
  std::vector<int> isuppz(2 * static_cast<size_t>(n));
  int m = 0;
  int info = syevr(vectors ? 'V' : 'N', range, n, A.data(), vl, vu, il, iu, &m, w.data(), Z.data(), isuppz.data());
  check_info(info, "Hermitian eigensolver");
  out.values = w.head(m);
  if (vectors) out.vectors = Z.leftCols(m);
  return out;
}

template <class S>
S random_entry(std::mt19937_64& g, std::normal_distribution<double>& nd) {
  if constexpr (std::is_same_v<S, double>) return nd(g);
  else return S(nd(g), nd(g));
}

}  // namespace

template <class S>
EigenPairs<S> hermitian_eigen(const Mat<S>& H, int lo, int hi, bool vectors) {
  const int n = static_cast<int>(H.rows());
  if (lo < 0 || hi > n || lo >= hi) throw std::invalid_argument("eigenpair index range out of bounds");
  return run_syevr<S>(H, 'I', 0, 0, lo + 1, hi, vectors);
}

template <class S>
EigenPairs<S> hermitian_eigen_window(const Mat<S>& H, double vl, double vu, bool vectors) {
  return run_syevr<S>(H, 'V', vl, vu, 0, 0, vectors);
}

static EigenPairs<double> run_stevr(const std::vector<double>& d, const std::vector<double>& e, char range, double vl,
                                    double vu, int il, int iu, bool vectors) {
  const int n = static_cast<int>(d.size());
  EigenPairs<double> out;
  if (n == 0) return out;
  std::vector<double> dd = d, ee = e;
  ee.resize(std::max(n, 1), 0.0);
  Eigen::VectorXd w(n);
  int ncols = range == 'I' ? iu - il + 1 : n;
  if (range == 'V' && vectors) {
    // count first so that a narrow window on a long chain does not allocate n x n
    auto cnt = run_stevr(d, e, 'V', vl, vu, 0, 0, false);
    ncols = static_cast<int>(cnt.values.size()) + 8;
  }
  Eigen::MatrixXd Z(n, vectors ? std::max(ncols, 1) : 1);
  std::vector<int> isuppz(2 * static_cast<size_t>(n));
  int m = 0;
  int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', range, n, dd.data(), ee.data(), vl, vu, il, iu, 0.0,
                            &m, w.data(), Z.data(), n, isuppz.data());
  check_info(info, "tridiagonal eigensolver");
  if (vectors && m > Z.cols()) throw std::runtime_error("tridiagonal eigensolver: window count changed");
  out.values = w.head(m);
  if (vectors) out.vectors = Z.leftCols(m);
  return out;
}

EigenPairs<double> tridiagonal_eigen_window(const std::vector<double>& d, const std::vector<double>& e, double vl,
                                            double vu, bool vectors) {
  return run_stevr(d, e, 'V', vl, vu, 0, 0, vectors);
}

EigenPairs<double> tridiagonal_eigen_index(const std::vector<double>& d, const std::vector<double>& e, int lo, int hi,
                                           bool vectors) {
  return run_stevr(d, e, 'I', 0, 0, lo + 1, hi, vectors);
}

template <class S>
LdltFactor<S>::LdltFactor(Mat<S>&& A, double sigma) : A_(std::move(A)), sigma_(sigma) {
  const int n = static_cast<int>(A_.rows());
  for (int i = 0; i < n; ++i) A_(i, i) -= sigma;
  ipiv_.resize(n);
  e_.resize(n);
  int info = sytrf(n, A_.data(), e_.data(), ipiv_.data());
  if (info > 0) throw std::runtime_error("shift coincides with an eigenvalue (singular factor)");
  check_info(info, "LDL^T factorization");
  for (int k = 0; k < n;) {
    if (ipiv_[k] > 0) {
      if (std::real(A_(k, k)) < 0) ++negatives_;
      ++k;
    } else {
      ++negatives_;  // a 2x2 pivot block is indefinite
      k += 2;
    }
  }
}

template <class S>
void LdltFactor<S>::solve(Mat<S>& B) const {
  int info = sytrs(static_cast<int>(A_.rows()), static_cast<int>(B.cols()), A_.data(), e_.data(), ipiv_.data(), B.data());
  check_info(info, "LDL^T solve");
}

template <class S>
NearestResult<S> nearest_eigenpairs(const LdltFactor<S>& F, const NearestOptions& opt) {
  const int n = F.size();
  const int bs = std::max(1, std::min(opt.block, n));
  const int nev = std::min(opt.nev, n);
  int mmax = opt.max_basis > 0 ? opt.max_basis : std::max(3 * nev, nev + 10 * bs);
  mmax = std::min(n, ((mmax + bs - 1) / bs) * bs);
  const int keep = std::min(mmax - bs, nev + bs);
  // eigenpair residual estimate |r| / theta^2 against this
  const double tol_abs = opt.tol * std::max(1.0, std::abs(F.sigma()));

  std::mt19937_64 gen(opt.seed);
  std::normal_distribution<double> nd;
  Mat<S> Q(n, mmax), W(n, mmax);
  int m = 0;

  // orthonormalize X against Q(:, :m) and internally; returns number of columns kept
  auto append = [&](Mat<S> X) {
    for (int pass = 0; pass < 2; ++pass)
      if (m > 0) X -= Q.leftCols(m) * (Q.leftCols(m).adjoint() * X);
    int added = 0;
    for (int j = 0; j < X.cols() && m < mmax; ++j) {
      Vec<S> x = X.col(j);
      for (int pass = 0; pass < 2; ++pass)
        if (m > 0) x -= Q.leftCols(m) * (Q.leftCols(m).adjoint() * x);
      double nx = x.norm();
      if (nx < 1e-10 * std::max(1.0, X.col(j).norm())) {
        for (int i = 0; i < n; ++i) x(i) = random_entry<S>(gen, nd);
        for (int pass = 0; pass < 2; ++pass)
          if (m > 0) x -= Q.leftCols(m) * (Q.leftCols(m).adjoint() * x);
        nx = x.norm();
      }
      Q.col(m) = x / nx;
      ++m;
      ++added;
    }
    if (added > 0) {
      Mat<S> w = Q.middleCols(m - added, added);
      F.solve(w);
      W.middleCols(m - added, added) = w;
    }
    return added;
  };

  Mat<S> X0(n, bs);
  for (int j = 0; j < bs; ++j)
    for (int i = 0; i < n; ++i) X0(i, j) = random_entry<S>(gen, nd);
  int last = m;
  append(X0);

  NearestResult<S> res;
  for (int restart = 0;; ++restart) {
    while (m < mmax) {
      int first = last;
      last = m;
      Mat<S> next = W.middleCols(first, m - first);
      if (append(next) == 0) break;
    }
    Mat<S> T = Q.leftCols(m).adjoint() * W.leftCols(m);
    T = (0.5 * (T + T.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat<S>> es(T);
    Eigen::VectorXd th = es.eigenvalues();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(th(a)) > std::abs(th(b)); });
    const int k = std::min(keep, m);
    Mat<S> Y(m, k);
    Eigen::VectorXd thk(k), rk(k);
    for (int j = 0; j < k; ++j) {
      Y.col(j) = es.eigenvectors().col(order[j]);
      thk(j) = th(order[j]);
    }
    Mat<S> QY = Q.leftCols(m) * Y, WY = W.leftCols(m) * Y;
    Mat<S> Rk = WY - QY * thk.asDiagonal();
    bool conv = true;
    for (int j = 0; j < k; ++j) {
      rk(j) = Rk.col(j).norm();
      if (j < nev && rk(j) > tol_abs * thk(j) * thk(j)) conv = false;
    }
    if (conv || m == n || restart >= opt.max_restarts) {
      res.converged = conv || m == n;
      res.restarts = restart;
      const int out = std::min(nev, k);
      std::vector<int> idx(out);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](int a, int b) { return F.sigma() + 1.0 / thk(a) < F.sigma() + 1.0 / thk(b); });
      res.values.resize(out);
      res.residuals.resize(out);
      res.vectors.resize(n, out);
      for (int j = 0; j < out; ++j) {
        res.values(j) = F.sigma() + 1.0 / thk(idx[j]);
        res.residuals(j) = rk(idx[j]) / (thk(idx[j]) * thk(idx[j]));
        res.vectors.col(j) = QY.col(idx[j]);
      }
      return res;
    }
    // thick restart: keep the best Ritz vectors, continue from their residual block
    Q.leftCols(k) = QY;
    W.leftCols(k) = WY;
    m = k;
    std::vector<int> unconv;
    for (int j = 0; j < k && static_cast<int>(unconv.size()) < bs; ++j)
      if (rk(j) > tol_abs * thk(j) * thk(j)) unconv.push_back(j);
    Mat<S> R(n, unconv.size());
    for (size_t j = 0; j < unconv.size(); ++j) R.col(j) = Rk.col(unconv[j]);
    last = m;
    append(R);
  }
}

template <class S>
double max_residual(const Mat<S>& H, const Eigen::VectorXd& E, const Mat<S>& V) {
  double r = 0;
  for (int j = 0; j < V.cols(); ++j) r = std::max(r, (H * V.col(j) - E(j) * V.col(j)).norm());
  return r;
}

template <class S>
double orthonormality_error(const Mat<S>& V) {
  Mat<S> G = V.adjoint() * V;
  G -= Mat<S>::Identity(G.rows(), G.cols());
  return G.cwiseAbs().maxCoeff();
}

#define HEXEDGE_INSTANTIATE(S)                                                                              \
  template EigenPairs<S> hermitian_eigen<S>(const Mat<S>&, int, int, bool);                                 \
  template EigenPairs<S> hermitian_eigen_window<S>(const Mat<S>&, double, double, bool);                    \
  template class LdltFactor<S>;                                                                             \
  template NearestResult<S> nearest_eigenpairs<S>(const LdltFactor<S>&, const NearestOptions&);             \
  template double max_residual<S>(const Mat<S>&, const Eigen::VectorXd&, const Mat<S>&);                    \
  template double orthonormality_error<S>(const Mat<S>&);

HEXEDGE_INSTANTIATE(double)
HEXEDGE_INSTANTIATE(cd)

}  // namespace hexedge
