#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hexedge/config.hpp"
#include "hexedge/experiments.hpp"

using namespace hexedge;
namespace fs = std::filesystem;

namespace {

struct Proc {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static fs::path d = [] {
    auto p = fs::temp_directory_path() / ("hexedge_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

Proc run_cli(const std::string& args) {
  const fs::path o = scratch() / "stdout", e = scratch() / "stderr";
  std::string cmd = std::string(HEXEDGE_CLI_PATH) + " " + args + " >" + o.string() + " 2>" + e.string();
  int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(o), slurp(e)};
}

fs::path write_ini(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("grid syntax") {
  CHECK(parse_grid("0.5") == std::vector<double>{0.5});
  CHECK(parse_grid("0.1, 0.2,0.4") == std::vector<double>{0.1, 0.2, 0.4});
  auto g = parse_grid("0:2:0.1");
  REQUIRE(g.size() == 21);
  CHECK(g.front() == 0);
  CHECK(std::abs(g.back() - 2) < 1e-12);
  CHECK(std::abs(g[3] - 0.3) < 1e-12);
  auto p = parse_grid("period 61");
  REQUIRE(p.size() == 61);
  CHECK(std::abs(p.front() + kPi) < 1e-12);
  CHECK(std::abs(p.back() - kPi) < 1e-12);
  CHECK(std::abs(parse_grid("2pi/3")[0] - 2 * kPi / 3) < 1e-15);
  CHECK_THROWS_AS(parse_grid("0:1:0.3"), InputError);
  CHECK_THROWS_AS(parse_grid("abc"), InputError);
  CHECK_THROWS_AS(parse_grid(""), InputError);
}

TEST_CASE("config parsing is strict") {
  auto c = parse_config("[run]\nexperiment = edge\nthreads = 2\n[model]\nedge = armchair\ndelta = 0.1, 0.2\nwall = tanh_plus_bump 10 50\n[numerics]\nNT = 72\n");
  CHECK(c.experiment == "edge");
  CHECK(c.threads == 2);
  CHECK(c.a1 == 1);
  CHECK(c.b1 == 1);
  CHECK(c.delta.size() == 2);
  CHECK(c.NT == 72);
  CHECK(c.wall_spec().kind == WallKind::TanhPlusBump);
  CHECK(c.given.count("numerics.NT") == 1);
  CHECK(c.given.count("numerics.P") == 0);
  CHECK_THROWS_AS(parse_config("[model]\ncolour = red\n"), InputError);
  CHECK_THROWS_AS(parse_config("[extras]\nx = 1\n"), InputError);
  CHECK_THROWS_AS(parse_config("[run]\nthreads = 0\n"), InputError);
  CHECK_THROWS_AS(parse_config("[model]\nedge = 2 4\n"), InputError);
  CHECK_THROWS_AS(parse_config("[model]\nwall = sinh\n"), InputError);
  CHECK_THROWS_AS(load_config((scratch() / "missing.ini").string()), InputError);
}

TEST_CASE("catalog names every figure") {
  const auto& cat = experiment_catalog();
  CHECK(cat.size() >= 14);
  for (int f = 2; f <= 8; ++f) {
    bool named = false;
    for (const auto& e : cat) named = named || e.description.find("Fig. " + std::to_string(f)) != std::string::npos;
    CHECK_MESSAGE(named, "Fig. ", f);
  }
  CHECK(find_experiment("fig8") != nullptr);
  CHECK(find_experiment("fig9") == nullptr);
}

TEST_CASE("hexedge list and help") {
  auto p = run_cli("list");
  CHECK(p.code == 0);
  for (const auto& e : experiment_catalog()) CHECK(p.out.find(e.name) != std::string::npos);
  auto h = run_cli("fig2-top --help");
  CHECK(h.code == 0);
  for (const char* flag : {"--config", "--out", "--threads"}) CHECK(h.out.find(flag) != std::string::npos);
}

TEST_CASE("hexedge exit codes") {
  auto bad = write_ini("bad.ini", "[model]\neps = ten\n");
  auto p = run_cli("dirac --config " + bad.string());
  CHECK(p.code == 1);
  CHECK(p.err.find("\"error\":\"input\"") != std::string::npos);
  CHECK(run_cli("dirac --config " + (scratch() / "none.ini").string()).code == 1);
  CHECK(run_cli("").code == 1);
  auto mismatch = write_ini("mismatch.ini", "[run]\nexperiment = fig5\n");
  CHECK(run_cli("dirac --config " + mismatch.string()).code == 1);
  // the free Laplacian has a threefold degeneracy at K
  auto free = write_ini("free.ini", "[model]\neps = 0\n");
  auto q = run_cli("dirac --config " + free.string() + " --out " + (scratch() / "free").string());
  CHECK(q.code == 2);
  CHECK(q.err.find("\"error\":\"numerical\"") != std::string::npos);
}

TEST_CASE("potential files are resolved next to the config") {
  fs::create_directories(scratch() / "sub");
  std::ofstream(scratch() / "sub" / "v.txt") << hexedge::builtin_example().V.to_text();
  std::ofstream(scratch() / "sub" / "broken.txt") << "1 0 x y\n";
  auto ok = write_ini("sub/pot.ini", "[model]\npotential = v.txt\n");
  auto c = load_config(ok.string());
  CHECK(c.V().coeffs == builtin_example().V.coeffs);
  auto broken = write_ini("sub/broken.ini", "[model]\npotential = broken.txt\n");
  CHECK(run_cli("dirac --config " + broken.string() + " --out " + (scratch() / "broken").string()).code == 1);
}

TEST_CASE("hexedge run writes data and a manifest") {
  auto ini = write_ini("dirac.ini", "[run]\nexperiment = dirac\n[model]\neps = -10\n");
  const fs::path out = scratch() / "dirac";
  auto p = run_cli("run --config " + ini.string() + " --out " + out.string());
  REQUIRE(p.code == 0);
  auto man = nlohmann::json::parse(slurp(out / "run.json"));
  CHECK(man["hexedge_version"] == kVersion);
  CHECK(man["experiment"] == "dirac");
  CHECK(man["config"]["model"]["eps"] == -10.0);
  CHECK(man["config"]["numerics"].contains("N"));
  CHECK(man["libraries"].contains("lapack"));
  CHECK(man["summary"]["b_star"] == 2);
  auto cert = nlohmann::json::parse(slurp(out / "certificate.json"));
  CHECK(cert["b_star"] == 2);
}
