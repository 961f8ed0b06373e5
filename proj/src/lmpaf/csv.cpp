#include "lmpaf/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "lmpaf/errors.hpp"
#include "lmpaf/event_data.hpp"
#include "lmpaf/format.hpp"
#include "lmpaf/table.hpp"

namespace lmpaf {

namespace {

double parse_number(const Table::Cell& cell, const std::string& where) {
  if (cell.kind != Table::Cell::Kind::Number)
    fail(errc::parse_error, "expected a number " + where);
  return cell.number;
}

std::string cell_string(const Table::Cell& cell) {
  switch (cell.kind) {
    case Table::Cell::Kind::Empty: return "";
    case Table::Cell::Kind::Number: return format_double(cell.number);
    case Table::Cell::Kind::Text: return cell.text;
  }
  return "";
}

std::size_t require_column(const Table& t, const std::string& name,
                           const std::string& path) {
  for (std::size_t j = 0; j < t.columns().size(); ++j)
    if (t.columns()[j] == name) return j;
  fail(errc::parse_error, path + ": missing required column '" + name + "'");
}

}  // namespace

ValidatedCohort read_cohort_csv(const std::string& cohort_path,
                                const std::optional<std::string>& panel_path,
                                std::optional<double> study_horizon) {
  Table t = Table::read_csv(cohort_path);
  std::size_t c_id = require_column(t, "subject_id", cohort_path);
  std::size_t c_entry = require_column(t, "entry_time", cohort_path);
  std::size_t c_exp = require_column(t, "exposure_time", cohort_path);
  std::size_t c_final = require_column(t, "final_time", cohort_path);
  std::size_t c_event = require_column(t, "event_type", cohort_path);

  std::vector<std::size_t> covariate_cols;
  for (std::size_t j = 0; j < t.columns().size(); ++j)
    if (j != c_id && j != c_entry && j != c_exp && j != c_final && j != c_event)
      covariate_cols.push_back(j);

  // string-valued columns become indicator sets relative to the first level
  std::map<std::size_t, std::vector<std::string>> categorical_levels;
  for (std::size_t j : covariate_cols) {
    std::set<std::string> levels;
    bool is_categorical = false;
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
      const auto& cell = t.at(i, j);
      if (cell.kind == Table::Cell::Kind::Text) is_categorical = true;
      levels.insert(cell_string(cell));
    }
    if (is_categorical)
      categorical_levels[j] =
          std::vector<std::string>(levels.begin(), levels.end());
  }

  CovariateSchema schema;
  for (std::size_t j : covariate_cols) {
    auto cat = categorical_levels.find(j);
    if (cat == categorical_levels.end()) {
      schema.names.push_back(t.columns()[j]);
    } else {
      for (std::size_t k = 1; k < cat->second.size(); ++k)
        schema.names.push_back(t.columns()[j] + "=" + cat->second[k]);
    }
  }

  std::vector<SubjectRecord> records;
  records.reserve(t.n_rows());
  double max_final = 0.0;
  for (std::size_t i = 0; i < t.n_rows(); ++i) {
    std::string where = "at " + cohort_path + " row " + std::to_string(i + 2);
    SubjectRecord r;
    r.subject_id = cell_string(t.at(i, c_id));
    if (r.subject_id.empty())
      fail(errc::parse_error, "empty subject_id " + where);
    r.entry_time = parse_number(t.at(i, c_entry), where);
    if (t.at(i, c_exp).kind != Table::Cell::Kind::Empty)
      r.exposure_time = parse_number(t.at(i, c_exp), where);
    r.final_time = parse_number(t.at(i, c_final), where);
    double ev = parse_number(t.at(i, c_event), where);
    if (ev != 0.0 && ev != 1.0 && ev != 2.0)
      fail(errc::parse_error, "event_type must be 0, 1 or 2 " + where);
    r.event_type = static_cast<EventType>(static_cast<int>(ev));
    max_final = std::max(max_final, r.final_time);

    for (std::size_t j : covariate_cols) {
      auto cat = categorical_levels.find(j);
      if (cat == categorical_levels.end()) {
        r.baseline_covariates[t.columns()[j]] = parse_number(t.at(i, j), where);
      } else {
        std::string value = cell_string(t.at(i, j));
        for (std::size_t k = 1; k < cat->second.size(); ++k)
          r.baseline_covariates[t.columns()[j] + "=" + cat->second[k]] =
              value == cat->second[k] ? 1.0 : 0.0;
      }
    }
    records.push_back(std::move(r));
  }
  if (records.empty())
    fail(errc::parse_error, cohort_path + " contains no data rows");

  if (panel_path) {
    Table p = Table::read_csv(*panel_path);
    std::size_t p_id = require_column(p, "subject_id", *panel_path);
    std::size_t p_time = require_column(p, "time", *panel_path);
    std::vector<std::size_t> value_cols;
    for (std::size_t j = 0; j < p.columns().size(); ++j)
      if (j != p_id && j != p_time) value_cols.push_back(j);
    for (std::size_t j : value_cols)
      if (!schema.contains(p.columns()[j]))
        schema.names.push_back(p.columns()[j]);

    std::unordered_map<std::string, SubjectRecord*> by_id;
    for (auto& r : records) by_id[r.subject_id] = &r;

    // collect then sort per subject so file order does not matter
    std::unordered_map<std::string, std::vector<PanelEntry>> entries;
    for (std::size_t i = 0; i < p.n_rows(); ++i) {
      std::string where =
          "at " + *panel_path + " row " + std::to_string(i + 2);
      std::string id = cell_string(p.at(i, p_id));
      if (!by_id.count(id))
        fail(errc::parse_error, "unknown subject '" + id + "' " + where);
      PanelEntry e;
      e.time = parse_number(p.at(i, p_time), where);
      for (std::size_t j : value_cols) {
        if (p.at(i, j).kind == Table::Cell::Kind::Empty) continue;  // no update
        e.values[p.columns()[j]] = parse_number(p.at(i, j), where);
      }
      entries[id].push_back(std::move(e));
    }
    for (auto& [id, list] : entries) {
      std::sort(list.begin(), list.end(),
                [](const PanelEntry& a, const PanelEntry& b) {
                  return a.time < b.time;
                });
      by_id[id]->covariate_panel = std::move(list);
    }
  }

  double horizon = study_horizon.value_or(max_final);
  return validate_cohort(std::move(records), std::move(schema), horizon,
                         /*censoring_allowed=*/true);
}

void write_cohort_csv(const ValidatedCohort& cohort, const std::string& path) {
  std::vector<std::string> columns = {"subject_id", "entry_time",
                                      "exposure_time", "final_time",
                                      "event_type"};
  for (const auto& name : cohort.covariate_schema.names)
    columns.push_back(name);
  Table t(columns);
  for (const auto& r : cohort.records) {
    std::vector<Table::Cell> row;
    row.push_back(Table::Cell::of(r.subject_id));
    row.push_back(Table::Cell::of(r.entry_time));
    row.push_back(r.exposure_time ? Table::Cell::of(*r.exposure_time)
                                  : Table::Cell::empty());
    row.push_back(Table::Cell::of(r.final_time));
    row.push_back(Table::Cell::of(static_cast<double>(r.event_type)));
    for (const auto& name : cohort.covariate_schema.names) {
      auto it = r.baseline_covariates.find(name);
      row.push_back(it == r.baseline_covariates.end()
                        ? Table::Cell::empty()
                        : Table::Cell::of(it->second));
    }
    t.add_row(std::move(row));
  }
  t.write_csv(path);
}

}  // namespace lmpaf
