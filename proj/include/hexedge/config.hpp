#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexedge/potential.hpp"
#include "json.hpp"

namespace hexedge {

// Bad input (exit code 1). Numerical failures surface as other std::exception types (exit code 2).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// INI file with sections [run], [model], [numerics]; see README for every key.
struct RunConfig {
  std::string source;  // file name, empty for in-memory configs
  std::set<std::string> given;  // "section.key" for every key present in the file

  // [run]
  std::string experiment;
  std::string out = "out";
  int threads = 1;

  // [model]
  double eps = 10;
  int a1 = 1, b1 = 0;
  std::string potential = "builtin";  // builtin | path to a V coefficient file
  std::string odd_potential;          // path to a W coefficient file (default: builtin W)
  std::string wall = "tanh";
  std::vector<double> delta;  // single value or grid
  std::vector<double> kpar;   // empty: the Dirac quasimomentum K . v1

  // [numerics]
  int N = 8;              // bulk plane-wave cutoff
  int N1 = 8;             // strip: |m1| <= N1
  int NT = 0;             // strip cells (0: from nt_scale)
  double nt_scale = 0;    // NT = ceil(nt_scale / delta) rounded up to nt_multiple (0: experiment default)
  int nt_multiple = 12;
  int P = 4;              // transverse harmonics per cell
  int bands = 8;          // reduced strip: bands kept per transverse quasimomentum
  int enrich = 4;
  bool full = false;
  int dense_limit = 2500;
  int nlambda = 201;
  int slice_bands = 4;
  int bulk_bands = 6;
  double tail_threshold = 1e-2;
  std::string eref;       // number | estar | band_max:<b> (empty: experiment default)
  std::string window;     // gap | local (empty: experiment default)
  double halfwidth = 0;   // local window half-width (0: experiment default)
  double margin = 0.1;
  double emin = 0, emax = 0;  // explicit window when emin < emax
  double max_jump = 0.05;
  int surface_grid = 24;
  double heff_h = 0.05;
  unsigned seed = 7;

  DomainWall wall_spec() const;
  FourierPotential V() const;
  FourierPotential W() const;
};

// Grid syntax: "x", "a, b, c", "start:stop:step" (inclusive), or "period n" (n points on [-pi, pi]).
std::vector<double> parse_grid(const std::string& text);

RunConfig parse_config(const std::string& text, const std::string& source = "");
RunConfig load_config(const std::string& path);
nlohmann::json config_json(const RunConfig& c);

}  // namespace hexedge
