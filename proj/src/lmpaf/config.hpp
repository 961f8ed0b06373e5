#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmpaf/hazards.hpp"
#include "lmpaf/paf.hpp"

namespace lmpaf {

struct LandmarkGrid {
  double from = 0.0;
  std::optional<double> to;  // default: horizon - window
  double by = 1.0;
  int min_count = 20;
};

struct SimulateSpec {
  HazardModelSpec model;
  std::int64_t n = 0;
  int replications = 1;
  double horizon = 0.0;
  std::optional<double> censoring_rate;
};

// One structured config drives every workflow; CLI flags override its keys.
struct RunConfig {
  std::vector<std::string> cohorts;  // one or more cohort CSV paths
  std::optional<std::string> panel;
  std::optional<double> horizon;

  std::optional<std::vector<double>> landmark_list;
  std::optional<LandmarkGrid> landmark_grid;
  double window = 0.0;

  std::vector<Method> methods;
  std::vector<std::string> adjustment;
  CensoringRoute route = CensoringRoute::Auto;
  IpwOptions ipw;
  SupermodelSpec supermodel;

  int bootstrap_replicates = 500;
  double ci_level = 0.95;

  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool plot = false;
  unsigned threads = 0;  // 0 = available parallelism

  std::optional<SimulateSpec> simulate;

  // report workflow inputs: estimate CSVs to summarize
  std::vector<std::string> report_inputs;
};

nlohmann::json load_json_file(const std::string& path);

// Deep merge: override values win, objects merge recursively.
nlohmann::json merge_json(nlohmann::json base, const nlohmann::json& overrides);

RunConfig parse_config(const nlohmann::json& j);

// Workflow-specific invariant checks (seed presence for stochastic steps,
// exactly one landmark specification form, positive window, ...).
void validate_config_for(const std::string& workflow, const RunConfig& cfg);

}  // namespace lmpaf
