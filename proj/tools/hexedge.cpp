#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "hexedge/config.hpp"
#include "hexedge/experiments.hpp"
#include "json.hpp"

namespace {

int fail(int code, const std::string& kind, const std::string& msg) {
  nlohmann::json j = {{"error", kind}, {"message", msg}, {"exit_code", code}};
  std::cerr << j.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hexedge;
  CLI::App app{"hexedge: edge states of honeycomb Schrodinger operators with a line defect"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  struct Flags {
    std::string config, out;
    int threads = 0;
  };
  std::map<CLI::App*, Flags> flags;
  std::map<CLI::App*, std::string> names;

  auto add_run_flags = [&](CLI::App* sub, bool config_required) {
    Flags& f = flags[sub];
    auto* c = sub->add_option("--config", f.config, "INI configuration file ([run], [model], [numerics])");
    if (config_required) c->required();
    c->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory (overrides run.out)");
    sub->add_option("--threads", f.threads, "worker threads (overrides run.threads)")->check(CLI::PositiveNumber);
  };

  auto* list = app.add_subcommand("list", "list experiments and the figure each one reproduces");
  auto* run = app.add_subcommand("run", "run the experiment named by run.experiment in the config");
  add_run_flags(run, true);
  for (const auto& e : experiment_catalog()) {
    auto* sub = app.add_subcommand(e.name, e.description);
    add_run_flags(sub, false);
    names[sub] = e.name;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(1, "usage", e.what());
  }

  if (list->parsed()) {
    for (const auto& e : experiment_catalog()) std::cout << e.name << "\t" << e.description << "\n";
    return 0;
  }

  CLI::App* sub = run->parsed() ? run : nullptr;
  for (auto& [s, n] : names)
    if (s->parsed()) sub = s;
  const Flags& f = flags[sub];
  try {
    RunConfig cfg = f.config.empty() ? parse_config("") : load_config(f.config);
    if (sub != run) {
      if (!cfg.experiment.empty() && cfg.experiment != names[sub])
        throw InputError("config names experiment '" + cfg.experiment + "' but subcommand is '" + names[sub] + "'");
      cfg.experiment = names[sub];
    } else if (cfg.experiment.empty()) {
      throw InputError("run.experiment is missing from " + f.config);
    }
    if (!f.out.empty()) cfg.out = f.out;
    if (f.threads > 0) cfg.threads = f.threads;
    auto res = run_experiment(cfg, &std::cerr);
    for (const auto& file : res.files) std::cout << cfg.out << "/" << file << "\n";
    return 0;
  } catch (const InputError& e) {
    return fail(1, "input", e.what());
  } catch (const std::exception& e) {
    return fail(2, "numerical", e.what());
  }
}
