#pragma once

#include <stdexcept>
#include <string>

namespace lmpaf {

// Error conditions surfaced by the library. The names double as the flag
// strings written to output CSVs and as the diagnostics of the C API.
enum class errc {
  ok = 0,
  // cohort validation
  duplicate_id,
  negative_time,
  exposure_after_event,
  unknown_covariate,
  time_before_entry,
  censoring_present,
  // landmark construction
  empty_risk_set,
  mixed_windows,
  no_eligible_landmarks,
  // model fitting
  not_converged,
  rank_deficient_design,
  separation,
  missing_predictor,
  // estimands
  no_cases,
  degenerate_inputs,
  single_subject,
  all_exposed_at_baseline,
  grid_mismatch,
  zero_marginal_risk,
  insufficient_landmarks,
  too_many_failures,
  // plumbing
  invalid_argument,
  parse_error,
  io_error,
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lmpaf
