#include "lmpaf/errors.hpp"

namespace lmpaf {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::ok: return "Ok";
    case errc::duplicate_id: return "DuplicateId";
    case errc::negative_time: return "NegativeTime";
    case errc::exposure_after_event: return "ExposureAfterEvent";
    case errc::unknown_covariate: return "UnknownCovariate";
    case errc::time_before_entry: return "TimeBeforeEntry";
    case errc::censoring_present: return "CensoringPresent";
    case errc::empty_risk_set: return "EmptyRiskSet";
    case errc::mixed_windows: return "MixedWindows";
    case errc::no_eligible_landmarks: return "NoEligibleLandmarks";
    case errc::not_converged: return "NotConverged";
    case errc::rank_deficient_design: return "RankDeficientDesign";
    case errc::separation: return "Separation";
    case errc::missing_predictor: return "MissingPredictor";
    case errc::no_cases: return "NoCases";
    case errc::degenerate_inputs: return "DegenerateInputs";
    case errc::single_subject: return "SingleSubject";
    case errc::all_exposed_at_baseline: return "AllExposedAtBaseline";
    case errc::grid_mismatch: return "GridMismatch";
    case errc::zero_marginal_risk: return "ZeroMarginalRisk";
    case errc::insufficient_landmarks: return "InsufficientLandmarks";
    case errc::too_many_failures: return "TooManyFailures";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::parse_error: return "ParseError";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace lmpaf
