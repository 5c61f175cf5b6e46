#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hexedge/config.hpp"
#include "json.hpp"

namespace hexedge {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentInfo {
  std::string name;
  std::string description;
};
const std::vector<ExperimentInfo>& experiment_catalog();
const ExperimentInfo* find_experiment(const std::string& name);

struct RunOutcome {
  std::vector<std::string> files;  // relative to the output directory, run.json last
  nlohmann::json manifest;
};

// Runs cfg.experiment and writes its data files plus run.json into cfg.out.
// Throws InputError for bad configurations; other exceptions are numerical failures.
RunOutcome run_experiment(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace hexedge
