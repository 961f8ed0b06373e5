#include "landmark_paf.h"

#include <cstring>
#include <limits>
#include <string>

#include <json.hpp>

#include "lmpaf/config.hpp"
#include "lmpaf/csv.hpp"
#include "lmpaf/errors.hpp"
#include "lmpaf/event_data.hpp"
#include "lmpaf/format.hpp"
#include "lmpaf/rng.hpp"
#include "lmpaf/simulator.hpp"
#include "lmpaf/table.hpp"
#include "lmpaf/workflows.hpp"

using nlohmann::json;

struct lmpaf_cohort {
  lmpaf::ValidatedCohort data;
};

struct lmpaf_table {
  lmpaf::Table data;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_cell_text;

void set_error(const std::string& message) { g_last_error = message; }

lmpaf_status status_of(const lmpaf::Error& e) {
  using lmpaf::errc;
  switch (e.code()) {
    case errc::duplicate_id:
    case errc::negative_time:
    case errc::exposure_after_event:
    case errc::unknown_covariate:
    case errc::censoring_present:
      return LMPAF_ERR_VALIDATION;
    case errc::not_converged:
    case errc::rank_deficient_design:
    case errc::separation:
    case errc::no_cases:
    case errc::zero_marginal_risk:
    case errc::too_many_failures:
    case errc::single_subject:
    case errc::all_exposed_at_baseline:
      return LMPAF_ERR_ESTIMATION;
    case errc::parse_error:
      return LMPAF_ERR_PARSE;
    case errc::io_error:
      return LMPAF_ERR_IO;
    default:
      return LMPAF_ERR_INVALID_ARGUMENT;
  }
}

template <typename Fn>
lmpaf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LMPAF_OK;
  } catch (const lmpaf::Error& e) {
    set_error(e.what());
    return status_of(e);
  } catch (const std::exception& e) {
    set_error(std::string("Internal: ") + e.what());
    return LMPAF_ERR_INTERNAL;
  } catch (...) {
    set_error("Internal: unknown exception");
    return LMPAF_ERR_INTERNAL;
  }
}

json parse_json_config(const char* text) {
  if (!text) lmpaf::fail(lmpaf::errc::invalid_argument, "config is NULL");
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    lmpaf::fail(lmpaf::errc::parse_error, "config is not valid JSON");
  if (!j.is_object())
    lmpaf::fail(lmpaf::errc::parse_error, "config must be a JSON object");
  return j;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* lmpaf_version(void) { return "0.1.0"; }

const char* lmpaf_last_error(void) { return g_last_error.c_str(); }

void lmpaf_string_free(char* s) { delete[] s; }

lmpaf_status lmpaf_cohort_load(const char* cohort_csv_path,
                               const char* panel_csv_path_or_null,
                               double study_horizon, lmpaf_cohort** out) {
  return guarded([&] {
    if (!cohort_csv_path || !out)
      lmpaf::fail(lmpaf::errc::invalid_argument, "NULL argument");
    std::optional<std::string> panel;
    if (panel_csv_path_or_null) panel = panel_csv_path_or_null;
    std::optional<double> horizon;
    if (study_horizon >= 0.0) horizon = study_horizon;
    auto cohort = lmpaf::read_cohort_csv(cohort_csv_path, panel, horizon);
    *out = new lmpaf_cohort{std::move(cohort)};
  });
}

lmpaf_status lmpaf_cohort_simulate(const char* config_json,
                                   lmpaf_cohort** out) {
  return guarded([&] {
    if (!out) lmpaf::fail(lmpaf::errc::invalid_argument, "NULL output");
    json j = parse_json_config(config_json);
    lmpaf::RunConfig cfg = lmpaf::parse_config(j);
    lmpaf::validate_config_for("simulate", cfg);
    lmpaf::SimConfig sc;
    sc.n = cfg.simulate->n;
    sc.seed = *cfg.seed;
    sc.horizon = cfg.simulate->horizon;
    sc.censoring_rate = cfg.simulate->censoring_rate;
    auto cohort = lmpaf::simulate_cohort(cfg.simulate->model, sc);
    *out = new lmpaf_cohort{std::move(cohort)};
  });
}

lmpaf_status lmpaf_cohort_write(const lmpaf_cohort* cohort, const char* path) {
  return guarded([&] {
    if (!cohort || !path)
      lmpaf::fail(lmpaf::errc::invalid_argument, "NULL argument");
    lmpaf::write_cohort_csv(cohort->data, path);
  });
}

int64_t lmpaf_cohort_size(const lmpaf_cohort* cohort) {
  return cohort ? static_cast<int64_t>(cohort->data.records.size()) : 0;
}

void lmpaf_cohort_free(lmpaf_cohort* cohort) { delete cohort; }

lmpaf_status lmpaf_choose_landmarks(const lmpaf_cohort* cohort, double window,
                                    int64_t min_count, double spacing,
                                    double** out_landmarks,
                                    int64_t* out_count) {
  return guarded([&] {
    if (!cohort || !out_landmarks || !out_count)
      lmpaf::fail(lmpaf::errc::invalid_argument, "NULL argument");
    auto landmarks = lmpaf::choose_landmarks(
        cohort->data, window, static_cast<int>(min_count), spacing);
    *out_count = static_cast<int64_t>(landmarks.size());
    *out_landmarks = new double[landmarks.size()];
    std::memcpy(*out_landmarks, landmarks.data(),
                landmarks.size() * sizeof(double));
  });
}

void lmpaf_buffer_free(double* buffer) { delete[] buffer; }

namespace {

lmpaf_status estimate_impl(const lmpaf_cohort* cohort, const char* config_json,
                           lmpaf_table** out, bool with_bootstrap) {
  return guarded([&] {
    if (!cohort || !out)
      lmpaf::fail(lmpaf::errc::invalid_argument, "NULL argument");
    json j = parse_json_config(config_json);
    lmpaf::RunConfig cfg = lmpaf::parse_config(j);
    cfg.cohorts = {"<handle>"};  // satisfied by the handle, not a file
    lmpaf::validate_config_for(with_bootstrap ? "bootstrap" : "estimate", cfg);
    std::uint64_t stream =
        with_bootstrap ? lmpaf::derive_seed(*cfg.seed, 0x10000u) : 0;
    auto all = lmpaf::estimate_all_methods(cohort->data, cfg, with_bootstrap,
                                           stream);
    *out = new lmpaf_table{lmpaf::estimates_to_table(all)};
  });
}

}  // namespace

lmpaf_status lmpaf_estimate(const lmpaf_cohort* cohort,
                            const char* config_json, lmpaf_table** out) {
  return estimate_impl(cohort, config_json, out, false);
}

lmpaf_status lmpaf_bootstrap(const lmpaf_cohort* cohort,
                             const char* config_json, lmpaf_table** out) {
  return estimate_impl(cohort, config_json, out, true);
}

lmpaf_status lmpaf_true_paf(const char* config_json, const double* landmarks,
                            int64_t n_landmarks, double window,
                            lmpaf_table** out) {
  return guarded([&] {
    if (!out || (!landmarks && n_landmarks > 0))
      lmpaf::fail(lmpaf::errc::invalid_argument, "NULL argument");
    json j = parse_json_config(config_json);
    lmpaf::RunConfig cfg = lmpaf::parse_config(j);
    if (!cfg.simulate)
      lmpaf::fail(lmpaf::errc::invalid_argument,
                  "config needs a 'simulate' section (hazard model)");
    std::vector<double> grid(landmarks, landmarks + n_landmarks);
    auto curve = lmpaf::true_paf_curve(cfg.simulate->model, grid, window);
    *out = new lmpaf_table{lmpaf::truth_to_table(curve)};
  });
}

int64_t lmpaf_table_rows(const lmpaf_table* table) {
  return table ? static_cast<int64_t>(table->data.n_rows()) : 0;
}

int64_t lmpaf_table_cols(const lmpaf_table* table) {
  return table ? static_cast<int64_t>(table->data.n_cols()) : 0;
}

const char* lmpaf_table_column_name(const lmpaf_table* table, int64_t col) {
  if (!table || col < 0 ||
      col >= static_cast<int64_t>(table->data.n_cols()))
    return nullptr;
  return table->data.columns()[static_cast<std::size_t>(col)].c_str();
}

double lmpaf_table_value(const lmpaf_table* table, int64_t row, int64_t col) {
  double nan = std::numeric_limits<double>::quiet_NaN();
  if (!table || row < 0 || col < 0) return nan;
  if (row >= static_cast<int64_t>(table->data.n_rows()) ||
      col >= static_cast<int64_t>(table->data.n_cols()))
    return nan;
  const auto& cell = table->data.at(static_cast<std::size_t>(row),
                                    static_cast<std::size_t>(col));
  return cell.kind == lmpaf::Table::Cell::Kind::Number ? cell.number : nan;
}

const char* lmpaf_table_text(const lmpaf_table* table, int64_t row,
                             int64_t col) {
  if (!table || row < 0 || col < 0) return nullptr;
  if (row >= static_cast<int64_t>(table->data.n_rows()) ||
      col >= static_cast<int64_t>(table->data.n_cols()))
    return nullptr;
  const auto& cell = table->data.at(static_cast<std::size_t>(row),
                                    static_cast<std::size_t>(col));
  switch (cell.kind) {
    case lmpaf::Table::Cell::Kind::Empty: g_cell_text.clear(); break;
    case lmpaf::Table::Cell::Kind::Number:
      g_cell_text = lmpaf::format_double(cell.number);
      break;
    case lmpaf::Table::Cell::Kind::Text: g_cell_text = cell.text; break;
  }
  return g_cell_text.c_str();
}

lmpaf_status lmpaf_table_write_csv(const lmpaf_table* table,
                                   const char* path) {
  return guarded([&] {
    if (!table || !path)
      lmpaf::fail(lmpaf::errc::invalid_argument, "NULL argument");
    table->data.write_csv(path);
  });
}

void lmpaf_table_free(lmpaf_table* table) { delete table; }

lmpaf_status lmpaf_run(const char* workflow, const char* config_json,
                       char** manifest_json_out, int64_t* warnings_out) {
  return guarded([&] {
    if (!workflow) lmpaf::fail(lmpaf::errc::invalid_argument, "NULL workflow");
    json j = parse_json_config(config_json);
    lmpaf::WorkflowResult result = lmpaf::run_workflow(workflow, j);
    if (manifest_json_out)
      *manifest_json_out = dup_string(result.manifest.dump(2));
    if (warnings_out) *warnings_out = result.warnings;
  });
}

}  // extern "C"
