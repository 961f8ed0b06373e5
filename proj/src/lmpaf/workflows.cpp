#include "lmpaf/workflows.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "lmpaf/csv.hpp"
#include "lmpaf/errors.hpp"
#include "lmpaf/event_data.hpp"
#include "lmpaf/format.hpp"
#include "lmpaf/parallel.hpp"
#include "lmpaf/rng.hpp"
#include "lmpaf/sha256.hpp"
#include "lmpaf/stats.hpp"
#include "lmpaf/svg.hpp"

namespace lmpaf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kZ975 = 1.959963984540054;

std::string indexed_name(const std::string& stem, int index, int total,
                         const std::string& ext) {
  if (total <= 1) return stem + ext;
  int width = 1;
  for (int v = total; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index + 1);
  return stem + "_" + std::string(width - static_cast<int>(digits.size()), '0') +
         digits + ext;
}

struct Emitter {
  fs::path dir;
  json outputs = json::array();
  int warnings = 0;

  std::string write(const Table& t, const std::string& name) {
    fs::path p = dir / name;
    t.write_csv(p.string());
    outputs.push_back({{"path", name}, {"sha256", sha256_file_hex(p.string())}});
    return p.string();
  }

  void record(const std::string& name) {
    fs::path p = dir / name;
    outputs.push_back({{"path", name}, {"sha256", sha256_file_hex(p.string())}});
  }
};

unsigned effective_threads(const RunConfig& cfg) {
  return cfg.threads == 0 ? default_threads() : cfg.threads;
}

std::vector<double> oracle_grid(const RunConfig& cfg, double horizon) {
  if (cfg.landmark_list) return *cfg.landmark_list;
  LandmarkGrid g = cfg.landmark_grid.value_or(LandmarkGrid{});
  double to = g.to.value_or(horizon - cfg.window);
  std::vector<double> out;
  for (double l = g.from; l <= to + 1e-12; l += g.by) out.push_back(l);
  return out;
}

}  // namespace

Table estimates_to_table(const std::vector<EstimateSeries>& all) {
  Table t({"landmark", "method", "estimate", "ci_low", "ci_high", "n_at_risk",
           "n_exposed", "n_cases", "flag"});
  for (const auto& series : all) {
    for (const auto& p : series.points) {
      std::vector<Table::Cell> row;
      row.push_back(Table::Cell::of(p.landmark));
      row.push_back(Table::Cell::of(std::string(method_name(series.method))));
      row.push_back(std::isfinite(p.estimate) ? Table::Cell::of(p.estimate)
                                              : Table::Cell::empty());
      row.push_back(std::isfinite(p.ci_low) ? Table::Cell::of(p.ci_low)
                                            : Table::Cell::empty());
      row.push_back(std::isfinite(p.ci_high) ? Table::Cell::of(p.ci_high)
                                             : Table::Cell::empty());
      row.push_back(Table::Cell::of(static_cast<double>(p.n_at_risk)));
      row.push_back(Table::Cell::of(static_cast<double>(p.n_exposed)));
      row.push_back(Table::Cell::of(static_cast<double>(p.n_cases)));
      row.push_back(Table::Cell::of(p.flag));
      t.add_row(std::move(row));
    }
  }
  return t;
}

Table truth_to_table(const std::vector<TruePafPoint>& curve) {
  Table t({"landmark", "variant", "true_paf"});
  for (const auto& p : curve) {
    t.add_row({Table::Cell::of(p.landmark),
               Table::Cell::of(std::string("AtLandmark")),
               Table::Cell::of(p.at_landmark)});
    t.add_row({Table::Cell::of(p.landmark),
               Table::Cell::of(std::string("Window")),
               Table::Cell::of(p.window)});
  }
  return t;
}

Table wald_to_table(const std::vector<WaldRow>& rows) {
  Table t({"model", "term", "estimate", "se", "wald_z", "p_value"});
  for (const auto& r : rows)
    t.add_row({Table::Cell::of(r.model), Table::Cell::of(r.term),
               Table::Cell::of(r.estimate), Table::Cell::of(r.se),
               Table::Cell::of(r.z), Table::Cell::of(r.p_value)});
  return t;
}

Table report_summary(const std::vector<Table>& runs) {
  // (landmark, method) -> estimates across runs
  std::map<std::pair<double, std::string>, std::vector<double>> cells;
  for (const auto& t : runs) {
    int c_lm = -1, c_method = -1, c_est = -1, c_flag = -1;
    for (std::size_t j = 0; j < t.columns().size(); ++j) {
      if (t.columns()[j] == "landmark") c_lm = static_cast<int>(j);
      if (t.columns()[j] == "method") c_method = static_cast<int>(j);
      if (t.columns()[j] == "estimate") c_est = static_cast<int>(j);
      if (t.columns()[j] == "flag") c_flag = static_cast<int>(j);
    }
    if (c_lm < 0 || c_method < 0 || c_est < 0)
      fail(errc::parse_error, "input is not an estimates CSV");
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
      const auto& est = t.at(i, static_cast<std::size_t>(c_est));
      if (est.kind != Table::Cell::Kind::Number) continue;
      if (c_flag >= 0) {
        const auto& flag = t.at(i, static_cast<std::size_t>(c_flag));
        if (flag.kind == Table::Cell::Kind::Text &&
            flag.text.rfind("ok", 0) != 0)
          continue;
      }
      double lm = t.at(i, static_cast<std::size_t>(c_lm)).number;
      std::string method;
      const auto& mc = t.at(i, static_cast<std::size_t>(c_method));
      method = mc.kind == Table::Cell::Kind::Text ? mc.text
                                                  : format_double(mc.number);
      cells[{lm, method}].push_back(est.number);
    }
  }

  Table out({"landmark", "method", "n_runs", "mean", "median", "q1", "q3"});
  for (const auto& [key, values] : cells) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    out.add_row({Table::Cell::of(key.first), Table::Cell::of(key.second),
                 Table::Cell::of(static_cast<double>(values.size())),
                 Table::Cell::of(mean),
                 Table::Cell::of(quantile_type7(values, 0.5)),
                 Table::Cell::of(quantile_type7(values, 0.25)),
                 Table::Cell::of(quantile_type7(values, 0.75))});
  }
  return out;
}

std::vector<double> resolve_landmarks(const RunConfig& cfg,
                                      const ValidatedCohort& cohort) {
  if (cfg.landmark_list) return *cfg.landmark_list;
  LandmarkGrid g = cfg.landmark_grid.value_or(LandmarkGrid{});
  std::vector<double> out = choose_landmarks(cohort, cfg.window, g.min_count,
                                             g.by, g.from, g.to);
  return out;
}

std::vector<EstimateSeries> estimate_all_methods(const ValidatedCohort& cohort,
                                                 const RunConfig& cfg,
                                                 bool with_bootstrap,
                                                 std::uint64_t seed_stream) {
  std::vector<double> landmarks = resolve_landmarks(cfg, cohort);
  if (landmarks.empty())
    fail(errc::no_eligible_landmarks,
         "no landmark passed the risk-set threshold");

  std::vector<EstimateSeries> all;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    EstimatorConfig ec;
    ec.method = cfg.methods[m];
    ec.adjustment = cfg.adjustment;
    ec.route = cfg.route;
    ec.ipw = cfg.ipw;
    ec.supermodel = cfg.supermodel;
    ec.threads = effective_threads(cfg);
    EstimateSeries series;
    if (with_bootstrap) {
      series = bootstrap_series(cohort, landmarks, cfg.window, ec,
                                cfg.bootstrap_replicates,
                                derive_seed(seed_stream, m), cfg.ci_level);
    } else {
      series = estimate_series(cohort, landmarks, cfg.window, ec);
      if (ec.method == Method::LM_Miettinen) {
        // normal delta-method intervals alongside the point estimates; the
        // bootstrap workflow replaces them with percentile intervals
        for (auto& p : series.points) {
          if (p.ok() && std::isfinite(p.delta_variance)) {
            double half = kZ975 * std::sqrt(p.delta_variance);
            p.ci_low = p.estimate - half;
            p.ci_high = p.estimate + half;
            p.flag = "ok;delta_ci";
          }
        }
      }
    }
    all.push_back(std::move(series));
  }
  return all;
}

namespace {

WorkflowResult run_simulate(const RunConfig& cfg, const json& echo) {
  Emitter out{fs::path(cfg.out_dir)};
  const SimulateSpec& spec = *cfg.simulate;
  for (int rep = 0; rep < spec.replications; ++rep) {
    SimConfig sc;
    sc.n = spec.n;
    sc.seed = derive_seed(*cfg.seed, static_cast<std::uint64_t>(rep));
    sc.horizon = spec.horizon;
    sc.censoring_rate = spec.censoring_rate;
    ValidatedCohort cohort = simulate_cohort(spec.model, sc);
    std::string name =
        indexed_name("cohort", rep, spec.replications, ".csv");
    write_cohort_csv(cohort, (out.dir / name).string());
    out.record(name);
  }
  if (cfg.window > 0.0) {
    auto curve =
        true_paf_curve(spec.model, oracle_grid(cfg, spec.horizon), cfg.window);
    out.write(truth_to_table(curve), "truth.csv");
  }
  WorkflowResult r;
  r.manifest = {{"workflow", "simulate"}, {"config", echo},
                {"outputs", out.outputs}};
  return r;
}

WorkflowResult run_truth(const RunConfig& cfg, const json& echo) {
  Emitter out{fs::path(cfg.out_dir)};
  const SimulateSpec& spec = *cfg.simulate;
  auto curve =
      true_paf_curve(spec.model, oracle_grid(cfg, spec.horizon), cfg.window);
  out.write(truth_to_table(curve), "truth.csv");
  WorkflowResult r;
  r.manifest = {{"workflow", "truth"}, {"config", echo},
                {"outputs", out.outputs}};
  return r;
}

WorkflowResult run_estimate_like(const std::string& workflow,
                                 const RunConfig& cfg, const json& echo) {
  const bool with_bootstrap = workflow == "bootstrap";
  Emitter out{fs::path(cfg.out_dir)};
  int total = static_cast<int>(cfg.cohorts.size());
  for (int c = 0; c < total; ++c) {
    ValidatedCohort cohort =
        read_cohort_csv(cfg.cohorts[static_cast<std::size_t>(c)], cfg.panel,
                        cfg.horizon);
    std::uint64_t stream =
        with_bootstrap ? derive_seed(*cfg.seed, 0x10000u + static_cast<unsigned>(c))
                       : 0;
    std::vector<EstimateSeries> all =
        estimate_all_methods(cohort, cfg, with_bootstrap, stream);
    for (const auto& s : all)
      for (const auto& p : s.points)
        if (!p.ok()) ++out.warnings;
    out.write(estimates_to_table(all),
              indexed_name("estimates", c, total, ".csv"));

    bool wants_supermodel =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::Supermodel) !=
        cfg.methods.end();
    if (wants_supermodel) {
      std::vector<double> landmarks = resolve_landmarks(cfg, cohort);
      std::vector<LandmarkDataset> datasets;
      for (double l : landmarks) {
        try {
          datasets.push_back(build_landmark_dataset(cohort, l, cfg.window));
        } catch (const Error&) {
        }
      }
      SupermodelFit fit = supermodel_fit(stack_landmarks(datasets),
                                         cfg.supermodel, cfg.adjustment,
                                         cfg.route);
      out.write(wald_to_table(fit.wald_table()),
                indexed_name("supermodel_coefficients", c, total, ".csv"));
    }

    if (cfg.plot) {
      std::string name = indexed_name("estimates", c, total, ".svg");
      write_estimates_svg(all, (out.dir / name).string());
      out.record(name);
    }
  }
  WorkflowResult r;
  r.manifest = {{"workflow", workflow}, {"config", echo},
                {"outputs", out.outputs}};
  r.warnings = out.warnings;
  return r;
}

WorkflowResult run_report(const RunConfig& cfg, const json& echo) {
  Emitter out{fs::path(cfg.out_dir)};
  std::vector<Table> runs;
  for (const auto& path : cfg.report_inputs)
    runs.push_back(Table::read_csv(path));
  out.write(report_summary(runs), "summary.csv");
  WorkflowResult r;
  r.manifest = {{"workflow", "report"}, {"config", echo},
                {"outputs", out.outputs}};
  return r;
}

}  // namespace

WorkflowResult run_workflow(const std::string& workflow, const json& config) {
  RunConfig cfg = parse_config(config);
  validate_config_for(workflow, cfg);
  fs::create_directories(cfg.out_dir);

  WorkflowResult result;
  if (workflow == "simulate") result = run_simulate(cfg, config);
  else if (workflow == "truth") result = run_truth(cfg, config);
  else if (workflow == "estimate" || workflow == "bootstrap")
    result = run_estimate_like(workflow, cfg, config);
  else if (workflow == "report") result = run_report(cfg, config);
  else fail(errc::invalid_argument, "unknown workflow '" + workflow + "'");

  std::string manifest_text = result.manifest.dump(2) + "\n";
  fs::path mp = fs::path(cfg.out_dir) / "manifest.json";
  std::ofstream f(mp, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot write manifest");
  f << manifest_text;
  return result;
}

}  // namespace lmpaf
