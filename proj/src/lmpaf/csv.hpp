#pragma once

#include <optional>
#include <string>

#include "lmpaf/types.hpp"

namespace lmpaf {

// Cohort CSV: subject_id, entry_time, exposure_time (empty if never),
// final_time, event_type (0|1|2), plus baseline covariate columns. String
// -valued covariate columns are expanded to indicator columns "name=level"
// (levels sorted, first level as reference). An optional long-format panel
// CSV (subject_id, time, numeric covariate columns) supplies time-varying
// values. The study horizon defaults to the largest final_time.
ValidatedCohort read_cohort_csv(const std::string& cohort_path,
                                const std::optional<std::string>& panel_path,
                                std::optional<double> study_horizon);

void write_cohort_csv(const ValidatedCohort& cohort, const std::string& path);

}  // namespace lmpaf
