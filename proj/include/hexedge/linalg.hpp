#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace hexedge {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct EigenPairs {
  Eigen::VectorXd values;  // ascending
  Mat<S> vectors;          // columns
};

// Dense Hermitian eigenpairs with indices [lo, hi) in ascending order (0-based).
template <class S>
EigenPairs<S> hermitian_eigen(const Mat<S>& H, int lo, int hi, bool vectors = true);
// All eigenpairs in the half-open window (vl, vu].
template <class S>
EigenPairs<S> hermitian_eigen_window(const Mat<S>& H, double vl, double vu, bool vectors = true);

// Symmetric tridiagonal eigenpairs (diag d, off-diagonal e). Window (vl, vu] or index range.
EigenPairs<double> tridiagonal_eigen_window(const std::vector<double>& d, const std::vector<double>& e, double vl,
                                            double vu, bool vectors = true);
EigenPairs<double> tridiagonal_eigen_index(const std::vector<double>& d, const std::vector<double>& e, int lo, int hi,
                                           bool vectors = true);

// Bunch-Kaufman factorization of (A - sigma I), consumed in place.
template <class S>
class LdltFactor {
 public:
  LdltFactor(Mat<S>&& A, double sigma);
  void solve(Mat<S>& B) const;
  // number of eigenvalues of A below sigma (Sylvester inertia)
  int negative_count() const { return negatives_; }
  int size() const { return static_cast<int>(A_.rows()); }
  double sigma() const { return sigma_; }

 private:
  Mat<S> A_;
  std::vector<int> ipiv_;
  std::vector<S> e_;
  double sigma_;
  int negatives_ = 0;
};

struct NearestOptions {
  int nev = 16;
  int block = 4;
  int max_basis = 0;  // 0: automatic
  double tol = 1e-11;  // on |r| / theta^2, relative to max(1, |sigma|)
  int max_restarts = 30;
  unsigned seed = 12345;
};

template <class S>
struct NearestResult {
  Eigen::VectorXd values;  // ascending
  Mat<S> vectors;
  Eigen::VectorXd residuals;  // shift-invert residual bounds
  int restarts = 0;
  bool converged = false;
};

// Eigenpairs of a Hermitian matrix nearest to sigma by block Lanczos on (A - sigma)^-1
// with full reorthogonalization and thick restart.
template <class S>
NearestResult<S> nearest_eigenpairs(const LdltFactor<S>& F, const NearestOptions& opt);

// Residual max_j ||H v_j - E_j v_j|| and max |V^H V - I|.
template <class S>
double max_residual(const Mat<S>& H, const Eigen::VectorXd& E, const Mat<S>& V);
template <class S>
double orthonormality_error(const Mat<S>& V);

// Keep BLAS single-threaded so that results do not depend on the worker count.
void pin_blas_threads();

}  // namespace hexedge
