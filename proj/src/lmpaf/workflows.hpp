#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lmpaf/config.hpp"
#include "lmpaf/simulator.hpp"
#include "lmpaf/table.hpp"

namespace lmpaf {

struct WorkflowResult {
  nlohmann::json manifest;  // config echo, seed, outputs with hashes
  int warnings = 0;         // flagged landmarks across written series
};

// Batch entry points behind the CLI: simulate | truth | estimate | bootstrap
// | report. Outputs land in cfg.out; a manifest sufficient to reproduce the
// run byte-for-byte is always written.
WorkflowResult run_workflow(const std::string& workflow,
                            const nlohmann::json& config);

// In-memory building blocks (also used by the C API).
Table estimates_to_table(const std::vector<EstimateSeries>& all);
Table truth_to_table(const std::vector<TruePafPoint>& curve);
Table wald_to_table(const std::vector<WaldRow>& rows);
Table report_summary(const std::vector<Table>& runs);

std::vector<double> resolve_landmarks(const RunConfig& cfg,
                                      const ValidatedCohort& cohort);

std::vector<EstimateSeries> estimate_all_methods(const ValidatedCohort& cohort,
                                                 const RunConfig& cfg,
                                                 bool with_bootstrap,
                                                 std::uint64_t seed_stream);

}  // namespace lmpaf
