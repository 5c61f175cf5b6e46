#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hexedge/bulk.hpp"
#include "json.hpp"

namespace hexedge {

struct SliceDiracPoint {
  int thirds = 0;  // lambda = thirds / 3
  double lambda = 0;
  bool kprime = false;
  std::string type() const { return kprime ? "K'" : "K"; }
};

// All lambda in (-1/2, 1/2] with Kstar + lambda K2 in K + dual lattice or K' + dual lattice.
std::vector<SliceDiracPoint> slice_dirac_points(const EdgeFrame& frame, const Third& Kstar);

struct NoFoldOptions {
  int nlambda = 201;
  int nrefine = 41;
  double refine_halfwidth = 0.02;
  double margin = 1e-6;
  int N = 8;
  int threads = 1;
};

struct NoFoldReport {
  EdgeFrame frame;
  double eps = 0, delta = 0, kappa_inf = 1, Estar = 0;
  std::vector<SliceDiracPoint> points;
  std::vector<std::pair<double, double>> intervals;  // merged spectrum of H+ and H- on the slice
  bool has_gap = false;
  double gap_lo = 0, gap_hi = 0;
  bool holds = false;
  bool resolution_warning = false;
  BandSlice plus, minus;
};

std::vector<std::pair<double, double>> merge_intervals(std::vector<std::pair<double, double>> iv);
std::vector<std::pair<double, double>> band_intervals(const BandSlice& s);
// lambda grid with local refinement around the given points
std::vector<double> refined_lambdas(int nlambda, const std::vector<double>& centers, int nrefine, double halfwidth);

NoFoldReport check_nofold(double eps, double delta, const FourierPotential& V, const FourierPotential& W,
                          double kappa_inf, const EdgeFrame& frame, const Third& Kstar, double Estar, int nbands,
                          const NoFoldOptions& opt = {});

// Range [min, max] of each of the lowest nbands bands of H+ and H- (W scaled by +-delta kappa_inf) over the
// slice base + lambda K2, lambda in (-1/2, 1/2]: grid extrema polished by Brent's method.
std::vector<std::pair<double, double>> slice_band_ranges(double eps, double delta, const FourierPotential& V,
                                                         const FourierPotential& W, double kappa_inf,
                                                         const EdgeFrame& frame, const Vec2& base, int nbands,
                                                         int nlambda = 201, int N = 8, int threads = 1);

// Width of the gap between band `band` and band + 1 (1-based) of the slice union; <= 0 when closed.
double slice_gap_width(double eps, double delta, const FourierPotential& V, const FourierPotential& W,
                       double kappa_inf, const EdgeFrame& frame, const Vec2& base, int band, int nlambda = 201,
                       int N = 8, int threads = 1);

// Bisection for the delta at which that gap opens, assuming closed at lo and open at hi.
struct GapThreshold {
  double lo = 0, hi = 0;
  int band = 1;
  std::vector<std::pair<double, double>> probes;  // (delta, gap width)
};
GapThreshold gap_threshold(double eps, const FourierPotential& V, const FourierPotential& W, double kappa_inf,
                           const EdgeFrame& frame, const Vec2& base, int band, double lo, double hi, double tol,
                           int nlambda = 201, int N = 8, int threads = 1);

void write_nofold_csv(std::ostream& os, const NoFoldReport& r);
nlohmann::json nofold_json(const NoFoldReport& r);

}  // namespace hexedge
