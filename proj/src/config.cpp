#include "hexedge/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "hexedge/lattice.hpp"

namespace hexedge {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  if (t == "pi") return kPi;
  if (t == "-pi") return -kPi;
  if (t == "2pi/3") return 2 * kPi / 3;
  if (t == "-2pi/3") return -2 * kPi / 3;
  size_t pos = 0;
  double x;
  try {
    x = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw InputError(key + ": not a number: '" + v + "'");
  }
  if (pos != t.size() || !std::isfinite(x)) throw InputError(key + ": not a number: '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw InputError(key + ": not an integer: '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw InputError(key + ": not a boolean: '" + v + "'");
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) throw InputError("empty grid");
  std::vector<double> g;
  if (t.rfind("period", 0) == 0) {
    int n = to_int("grid", t.substr(6));
    if (n < 2) throw InputError("grid: period needs at least 2 points");
    for (int i = 0; i < n; ++i) g.push_back(-kPi + 2 * kPi * i / (n - 1));
    return g;
  }
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw InputError("grid: expected start:stop:step, got '" + text + "'");
    double a = to_double("grid", parts[0]), b = to_double("grid", parts[1]), s = to_double("grid", parts[2]);
    if (!(s > 0) || b < a) throw InputError("grid: need step > 0 and stop >= start");
    long n = std::lround((b - a) / s);
    if (std::abs(a + n * s - b) > 1e-9 * std::max(1.0, std::abs(b))) throw InputError("grid: step does not divide range");
    for (long i = 0; i <= n; ++i) g.push_back(i == n ? b : a + i * s);
    return g;
  }
  std::stringstream ss(t);
  for (std::string p; std::getline(ss, p, ',');) g.push_back(to_double("grid", p));
  return g;
}

DomainWall RunConfig::wall_spec() const {
  try {
    return DomainWall::from_text(wall);
  } catch (const std::exception& e) {
    throw InputError(std::string("wall: ") + e.what());
  }
}

FourierPotential RunConfig::V() const {
  if (potential == "builtin") return builtin_example().V;
  return FourierPotential::load(potential);
}

FourierPotential RunConfig::W() const {
  if (odd_potential.empty()) return builtin_example().W;
  return FourierPotential::load(odd_potential);
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  RunConfig c;
  c.source = source;
  const std::map<std::string, std::set<std::string>> known = {
      {"run", {"experiment", "out", "threads"}},
      {"model", {"eps", "edge", "potential", "odd_potential", "wall", "delta", "kpar"}},
      {"numerics",
       {"N", "N1", "NT", "nt_scale", "nt_multiple", "P", "bands", "enrich", "full", "dense_limit", "nlambda",
        "slice_bands", "bulk_bands", "tail_threshold", "eref", "window", "halfwidth", "margin", "emin", "emax",
        "max_jump", "surface_grid", "heff_h", "seed"}}};
  for (const auto& [sec, body] : tree) {
    auto it = known.find(sec);
    if (it == known.end()) throw InputError("config: unknown section [" + sec + "]");
    if (!body.data().empty()) throw InputError("config: key '" + sec + "' outside a section");
    for (const auto& [key, val] : body) {
      if (!it->second.count(key)) throw InputError("config: unknown key '" + key + "' in [" + sec + "]");
      const std::string v = trim(val.data());
      const std::string k = sec + "." + key;
      c.given.insert(k);
      if (sec == "run") {
        if (key == "experiment") c.experiment = v;
        else if (key == "out") c.out = v;
        else if (key == "threads") c.threads = to_int(k, v);
      } else if (sec == "model") {
        if (key == "eps") c.eps = to_double(k, v);
        else if (key == "edge") {
          if (v == "zigzag") c.a1 = 1, c.b1 = 0;
          else if (v == "armchair") c.a1 = 1, c.b1 = 1;
          else {
            std::istringstream es(v);
            std::string x, y, z;
            if (!(es >> x >> y) || (es >> z)) throw InputError(k + ": expected 'a1 b1', zigzag or armchair");
            c.a1 = to_int(k, x);
            c.b1 = to_int(k, y);
          }
        } else if (key == "potential") c.potential = v;
        else if (key == "odd_potential") c.odd_potential = v;
        else if (key == "wall") c.wall = v;
        else if (key == "delta") c.delta = parse_grid(v);
        else if (key == "kpar") c.kpar = v == "star" ? std::vector<double>{} : parse_grid(v);
      } else {
        if (key == "N") c.N = to_int(k, v);
        else if (key == "N1") c.N1 = to_int(k, v);
        else if (key == "NT") c.NT = to_int(k, v);
        else if (key == "nt_scale") c.nt_scale = to_double(k, v);
        else if (key == "nt_multiple") c.nt_multiple = to_int(k, v);
        else if (key == "P") c.P = to_int(k, v);
        else if (key == "bands") c.bands = to_int(k, v);
        else if (key == "enrich") c.enrich = to_int(k, v);
        else if (key == "full") c.full = to_bool(k, v);
        else if (key == "dense_limit") c.dense_limit = to_int(k, v);
        else if (key == "nlambda") c.nlambda = to_int(k, v);
        else if (key == "slice_bands") c.slice_bands = to_int(k, v);
        else if (key == "bulk_bands") c.bulk_bands = to_int(k, v);
        else if (key == "tail_threshold") c.tail_threshold = to_double(k, v);
        else if (key == "eref") c.eref = v;
        else if (key == "window") c.window = v;
        else if (key == "halfwidth") c.halfwidth = to_double(k, v);
        else if (key == "margin") c.margin = to_double(k, v);
        else if (key == "emin") c.emin = to_double(k, v);
        else if (key == "emax") c.emax = to_double(k, v);
        else if (key == "max_jump") c.max_jump = to_double(k, v);
        else if (key == "surface_grid") c.surface_grid = to_int(k, v);
        else if (key == "heff_h") c.heff_h = to_double(k, v);
        else if (key == "seed") c.seed = static_cast<unsigned>(to_int(k, v));
      }
    }
  }
  if (c.threads < 1) throw InputError("run.threads must be >= 1");
  if (std::gcd(c.a1, c.b1) != 1) throw InputError("model.edge: a1, b1 must be coprime");
  if (c.N < 2 || c.N1 < 1 || c.P < 1 || c.bands < 1 || c.enrich < 0 || c.nlambda < 3 || c.slice_bands < 1 ||
      c.bulk_bands < 2 || c.surface_grid < 2 || c.nt_multiple < 4 || c.nt_multiple % 4 || c.NT < 0 || c.NT % 2)
    throw InputError("numerics: cutoff or count out of range");
  if (!(c.tail_threshold > 0 && c.tail_threshold < 1)) throw InputError("numerics.tail_threshold must be in (0, 1)");
  if (!c.window.empty() && c.window != "gap" && c.window != "local")
    throw InputError("numerics.window must be gap or local");
  // relative potential paths are taken relative to the config file
  auto resolve = [&](std::string& f) {
    if (f.empty() || f == "builtin" || source.empty() || std::filesystem::path(f).is_absolute()) return;
    auto q = std::filesystem::path(source).parent_path() / f;
    if (std::filesystem::exists(q)) f = q.string();
  };
  resolve(c.potential);
  resolve(c.odd_potential);
  if (c.potential != "builtin" && !std::filesystem::exists(c.potential))
    throw InputError("model.potential: file not found: " + c.potential);
  if (!c.odd_potential.empty() && !std::filesystem::exists(c.odd_potential))
    throw InputError("model.odd_potential: file not found: " + c.odd_potential);
  c.wall_spec();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["run"] = {{"experiment", c.experiment}, {"out", c.out}, {"threads", c.threads}};
  j["model"] = {{"eps", c.eps},         {"edge", {c.a1, c.b1}}, {"potential", c.potential},
                {"odd_potential", c.odd_potential.empty() ? "builtin" : c.odd_potential},
                {"wall", c.wall},       {"delta", c.delta},      {"kpar", c.kpar}};
  j["numerics"] = {{"N", c.N},
                   {"N1", c.N1},
                   {"NT", c.NT},
                   {"nt_scale", c.nt_scale},
                   {"nt_multiple", c.nt_multiple},
                   {"P", c.P},
                   {"bands", c.bands},
                   {"enrich", c.enrich},
                   {"full", c.full},
                   {"dense_limit", c.dense_limit},
                   {"nlambda", c.nlambda},
                   {"slice_bands", c.slice_bands},
                   {"bulk_bands", c.bulk_bands},
                   {"tail_threshold", c.tail_threshold},
                   {"eref", c.eref},
                   {"window", c.window},
                   {"halfwidth", c.halfwidth},
                   {"margin", c.margin},
                   {"emin", c.emin},
                   {"emax", c.emax},
                   {"max_jump", c.max_jump},
                   {"surface_grid", c.surface_grid},
                   {"heff_h", c.heff_h},
                   {"seed", c.seed}};
  return j;
}

}  // namespace hexedge
