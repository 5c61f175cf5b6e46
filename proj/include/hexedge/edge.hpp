#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hexedge/bulk.hpp"
#include "json.hpp"

namespace hexedge {

// Two-wall closure of a domain wall on a supercell of NT cells, as a function of the cell
// coordinate y in [0, NT): zeta = 2 pi delta y, L = 2 pi delta NT,
// kappa_dw = kappa_inf [g(zeta - L/4) - g(zeta - 3L/4) - 1].
struct WallProfile {
  DomainWall wall;
  double delta = 0;
  int NT = 0;
  double L = 0;
  int nmax = 0;
  std::vector<cplx> coeff;  // kappa_hat_n for |n| <= nmax, kappa_dw(y) = sum kappa_hat_n exp(2 pi i n y / NT)
  bool real_odd = false;    // coefficients real and zero at even n
  cplx hat(long n) const { return (n < -nmax || n > nmax) ? cplx(0) : coeff[n + nmax]; }
  double eval(double zeta) const;
  double fourier_eval(double y) const;
};

WallProfile periodicize_wall(const DomainWall& wall, double delta, int NT, int nmax = 0);

// max(32, ceil(scale / delta)) rounded up to a multiple of `multiple`
int supercell_cells(double delta, double scale = 16, int multiple = 12);

struct StripModel {
  EdgeFrame frame;
  double eps = 0, delta = 0;
  FourierPotential V, W;
  DomainWall wall;
  int NT = 32;
  int N1 = 8;      // |m1| <= N1
  int P = 4;       // transverse harmonics per cell: |p| <= P, m2 = NT p + r
  int N2 = 0;      // dense route: |m2| <= N2 (0: NT P + NT / 2)
  int bands = 8;   // reduced route: Bloch bands kept per transverse quasimomentum
  int enrich = 4;  // plus W applied to the lowest `enrich` bands
  bool full = false;  // keep every band (exact change of basis)
  int dense_N2() const { return N2 > 0 ? N2 : NT * P + NT / 2; }
};

// Plane-wave coefficients over m1 in [-N1, N1], m2 in [m2min, m2max]; index (m1 + N1) * n2 + m2 - m2min.
struct StripLayout {
  int N1 = 0;
  long m2min = 0, m2max = 0;
  int NT = 0;
  long n2() const { return m2max - m2min + 1; }
  long dim() const { return (2L * N1 + 1) * n2(); }
};

// Dense Hermitian matrix over |m1| <= N1, m2 in [m2min, m2max].
MatrixXc assemble_strip(const StripModel& m, double kpar, long m2min, long m2max);
MatrixXc assemble_strip(const StripModel& m, double kpar);

// Union over n of bulk bands at (kpar / 2 pi) K1 + (n / NT) K2 (the delta = 0 oracle), ascending.
std::vector<double> strip_bulk_oracle(const StripModel& m, double kpar, int bands_per_point, int N = 8);

// Bloch-reduced form: block r (r in [-NT/2, NT/2)) spans the chosen bands of the bulk operator at
// (kpar / 2 pi) K1 + (r / NT) K2; the wall couples blocks r, r' through kappa_hat_{NT j + r - r'}.
class ReducedStrip {
 public:
  ReducedStrip(const StripModel& m, double kpar, int threads = 1);
  bool is_real() const { return real_; }
  long dim() const { return offset_.back(); }
  const StripLayout& layout() const { return layout_; }
  // lower triangle is filled; the upper triangle is left unspecified
  Mat<double> real_matrix() const;
  Mat<cplx> complex_matrix() const;
  // plane-wave coefficients of a reduced vector; real vectors are in the phased (real) basis,
  // complex ones in the basis of complex_matrix()
  VectorXc expand(const Vec<double>& y) const;
  VectorXc expand(const Vec<cplx>& y) const;
  const std::vector<Eigen::VectorXd>& block_energies() const { return energies_; }

 private:
  template <class S>
  Mat<S> build() const;
  const StripModel& model_;
  double kpar_;
  int threads_;
  bool real_ = false;
  StripLayout layout_;
  PlaneWaveBasis cell_;
  WallProfile prof_;
  std::vector<MatrixXc> B_;  // nc x m_r
  std::vector<MatrixXc> Hp_;  // B_r^* H_r B_r
  std::vector<Eigen::VectorXd> energies_;
  std::vector<long> offset_;
};

// Gap: the whole gap widened by margin; Lower / Upper: halfwidth around the lower / upper gap edge.
// Without a gap the window is halfwidth around eref (or the middle of the gap_band overlap).
enum class EdgeWindow { Gap, Local, Lower, Upper };

struct EdgeOptions {
  int nbands = 0;               // > 0: the lowest nbands eigenpairs instead of a window
  double eref = NAN;            // energy whose gap defines the window (E_star)
  int gap_band = 0;             // > 0: use the gap above this band (1-based) instead of eref
  double emin = NAN, emax = NAN;  // explicit window
  EdgeWindow window = EdgeWindow::Gap;
  double halfwidth = 0.05;
  double margin = 0.1;          // window extends this fraction of the gap width into the bands
  int bulk_bands = 6;
  int nlambda = 201;
  int bulk_N = 8;
  double tail_threshold = 1e-2;
  bool dense = false;           // dense plane-wave route
  int dense_limit = 2500;       // full dense eigensolve below this dimension
  int threads = 1;
  unsigned seed = 7;
};

struct EdgeState {
  double energy = 0;
  VectorXc coefficients;
  std::vector<double> density;  // per cell, sums to 1
  double centroid = 0;
  double tail_mass = 1;
  bool localized = false;
  bool in_gap = false;
  int wall_index = 0;
};

struct EdgeSpectrum {
  double kpar = 0, delta = 0;
  int NT = 0;
  long dim = 0;
  std::string route;
  std::vector<double> eigenvalues;
  std::vector<std::pair<double, double>> bulk_intervals;
  bool has_gap = false;
  double gap_lo = 0, gap_hi = 0;
  double emin = 0, emax = 0;
  std::vector<EdgeState> states;     // eigenvalues inside bulk gaps (wall-resolved)
  std::vector<EdgeState> continuum;  // the remaining window eigenpairs
  double max_residual = 0;
  int count_localized(int wall) const;
};

struct DensityInfo {
  std::vector<double> density;
  double centroid = 0, tail_mass = 1;
};
DensityInfo transverse_density(const VectorXc& c, const StripLayout& lay);

// Union of the slice spectra of H+ and H- at kpar.
std::vector<std::pair<double, double>> strip_bulk_intervals(const StripModel& m, double kpar, int nbands,
                                                            int nlambda = 201, int N = 8, int threads = 1);

EdgeSpectrum edge_spectrum(const StripModel& m, double kpar, const EdgeOptions& opt = {});

struct BranchPoint {
  size_t grid = 0;   // index into the sweep
  size_t state = 0;  // index into EdgeSpectrum::states
  double x = 0, energy = 0;
};
struct Branch {
  int wall = 0;
  std::vector<BranchPoint> points;
  std::vector<double> slope;  // dE/dx, centred differences
};
// Continues localized gap states by nearest energy; overlap >= 0.7 decides between close candidates.
std::vector<Branch> track_branches(const std::vector<EdgeSpectrum>& sweep, const std::vector<double>& x,
                                   double max_jump);

using ModelForDelta = std::function<StripModel(double)>;
std::vector<EdgeSpectrum> spectrum_vs_delta(const ModelForDelta& make, double kpar, const std::vector<double>& deltas,
                                            const EdgeOptions& opt, int threads = 1);
std::vector<EdgeSpectrum> spectrum_vs_kpar(const StripModel& m, const std::vector<double>& kpars,
                                           const EdgeOptions& opt, int threads = 1);

void write_delta_csv(std::ostream& os, const std::vector<EdgeSpectrum>& sweep);
void write_kpar_csv(std::ostream& os, const std::vector<EdgeSpectrum>& sweep, const std::vector<Branch>& branches);
void write_branches_csv(std::ostream& os, const std::vector<Branch>& branches, const std::string& xname);
nlohmann::json strip_json(const StripModel& m);

// Pearson correlation of the wall-0 part of a density with |alpha(2 pi delta (y - NT/4))|^2 cell averages.
double envelope_correlation(const EdgeState& s, double delta, int NT, const std::function<double(double)>& alpha2);

}  // namespace hexedge
