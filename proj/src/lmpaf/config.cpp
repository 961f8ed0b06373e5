#include "lmpaf/config.hpp"

#include <fstream>

#include "lmpaf/errors.hpp"

namespace lmpaf {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(errc::io_error, "cannot open config '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    fail(errc::parse_error, "config '" + path + "': " + e.what());
  }
  if (!j.is_object()) fail(errc::parse_error, "config must be a JSON object");
  return j;
}

json merge_json(json base, const json& overrides) {
  if (!overrides.is_object() || !base.is_object()) return overrides;
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (base.contains(it.key()))
      base[it.key()] = merge_json(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
  return base;
}

namespace {

[[noreturn]] void bad(const std::string& what) {
  fail(errc::invalid_argument, "config: " + what);
}

HazardSpec parse_hazard(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("kind"))
    bad("hazard '" + name + "' needs a 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    if (!j.contains("rate")) bad("constant hazard '" + name + "' needs 'rate'");
    return HazardSpec::constant(j.at("rate").get<double>());
  }
  if (kind == "weibull") {
    if (!j.contains("shape") || !j.contains("scale"))
      bad("weibull hazard '" + name + "' needs 'shape' and 'scale'");
    return HazardSpec::weibull(j.at("shape").get<double>(),
                               j.at("scale").get<double>());
  }
  bad("hazard '" + name + "': unknown kind '" + kind + "'");
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  try {
    if (j.contains("cohort")) {
      if (j.at("cohort").is_array())
        cfg.cohorts = j.at("cohort").get<std::vector<std::string>>();
      else
        cfg.cohorts = {j.at("cohort").get<std::string>()};
    }
    if (j.contains("panel")) cfg.panel = j.at("panel").get<std::string>();
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<double>();
    if (j.contains("window")) cfg.window = j.at("window").get<double>();

    if (j.contains("landmarks")) {
      const json& lm = j.at("landmarks");
      if (lm.contains("list"))
        cfg.landmark_list = lm.at("list").get<std::vector<double>>();
      if (lm.contains("grid")) {
        LandmarkGrid g;
        const json& gj = lm.at("grid");
        if (gj.contains("from")) g.from = gj.at("from").get<double>();
        if (gj.contains("to")) g.to = gj.at("to").get<double>();
        if (gj.contains("by")) g.by = gj.at("by").get<double>();
        if (gj.contains("min_count"))
          g.min_count = gj.at("min_count").get<int>();
        cfg.landmark_grid = g;
      }
    }

    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) {
        auto parsed = method_from_name(m.get<std::string>());
        if (!parsed) bad("unknown method '" + m.get<std::string>() + "'");
        cfg.methods.push_back(*parsed);
      }
    }
    if (j.contains("adjustment"))
      cfg.adjustment = j.at("adjustment").get<std::vector<std::string>>();

    if (j.contains("route")) {
      std::string r = j.at("route").get<std::string>();
      if (r == "auto") cfg.route = CensoringRoute::Auto;
      else if (r == "complete") cfg.route = CensoringRoute::Complete;
      else if (r == "pseudo") cfg.route = CensoringRoute::PseudoValues;
      else bad("route must be auto|complete|pseudo");
    }

    if (j.contains("ipw")) {
      const json& ij = j.at("ipw");
      if (ij.contains("truncation_percentile")) {
        if (ij.at("truncation_percentile").is_null())
          cfg.ipw.truncation_percentile.reset();
        else
          cfg.ipw.truncation_percentile =
              ij.at("truncation_percentile").get<double>();
      }
      if (ij.contains("grid_step"))
        cfg.ipw.grid_step = ij.at("grid_step").get<double>();
      if (ij.contains("exposure_as_covariate"))
        cfg.ipw.exposure_as_covariate =
            ij.at("exposure_as_covariate").get<bool>();
      if (ij.contains("covariate_lag"))
        cfg.ipw.covariate_lag = ij.at("covariate_lag").get<double>();
      if (ij.contains("confounders"))
        cfg.ipw.confounders =
            ij.at("confounders").get<std::vector<std::string>>();
    }

    if (j.contains("supermodel")) {
      const json& sj = j.at("supermodel");
      if (sj.contains("basis")) {
        std::string b = sj.at("basis").get<std::string>();
        if (b == "polynomial")
          cfg.supermodel.basis = SupermodelSpec::Basis::Polynomial;
        else if (b == "indicator")
          cfg.supermodel.basis = SupermodelSpec::Basis::Indicator;
        else bad("supermodel basis must be polynomial|indicator");
      }
      if (sj.contains("degree")) {
        cfg.supermodel.degree = sj.at("degree").get<int>();
        if (cfg.supermodel.degree < 0) bad("supermodel degree must be >= 0");
      }
      if (sj.contains("intercept_interactions"))
        cfg.supermodel.intercept_interactions =
            sj.at("intercept_interactions").get<bool>();
      if (sj.contains("effect_interactions"))
        cfg.supermodel.effect_interactions =
            sj.at("effect_interactions").get<bool>();
    }

    if (j.contains("bootstrap")) {
      const json& bj = j.at("bootstrap");
      if (bj.contains("replicates"))
        cfg.bootstrap_replicates = bj.at("replicates").get<int>();
      if (bj.contains("level")) cfg.ci_level = bj.at("level").get<double>();
    }

    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("plot")) cfg.plot = j.at("plot").get<bool>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();

    if (j.contains("simulate")) {
      const json& sj = j.at("simulate");
      SimulateSpec spec;
      if (!sj.contains("hazards")) bad("simulate needs 'hazards'");
      const json& hj = sj.at("hazards");
      for (const char* t : {"a01", "a02", "a03", "a14", "a15"})
        if (!hj.contains(t)) bad(std::string("simulate.hazards needs '") + t + "'");
      spec.model.a01 = parse_hazard(hj.at("a01"), "a01");
      spec.model.a02 = parse_hazard(hj.at("a02"), "a02");
      spec.model.a03 = parse_hazard(hj.at("a03"), "a03");
      spec.model.a14 = parse_hazard(hj.at("a14"), "a14");
      spec.model.a15 = parse_hazard(hj.at("a15"), "a15");
      if (!sj.contains("n")) bad("simulate needs 'n'");
      spec.n = sj.at("n").get<std::int64_t>();
      if (sj.contains("replications"))
        spec.replications = sj.at("replications").get<int>();
      if (!sj.contains("horizon")) bad("simulate needs 'horizon'");
      spec.horizon = sj.at("horizon").get<double>();
      if (sj.contains("censoring_rate") && !sj.at("censoring_rate").is_null())
        spec.censoring_rate = sj.at("censoring_rate").get<double>();
      cfg.simulate = std::move(spec);
    }

    if (j.contains("report"))
      cfg.report_inputs = j.at("report").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(errc::parse_error, std::string("config: ") + e.what());
  }
  return cfg;
}

void validate_config_for(const std::string& workflow, const RunConfig& cfg) {
  auto need_landmarks = [&]() {
    int forms = (cfg.landmark_list ? 1 : 0) + (cfg.landmark_grid ? 1 : 0);
    if (forms != 1)
      bad("exactly one of landmarks.list and landmarks.grid must be given");
  };
  auto need_window = [&]() {
    if (!(cfg.window > 0.0)) bad("window must be positive");
  };
  auto need_seed = [&]() {
    if (!cfg.seed)
      bad("seed is required when a stochastic step is enabled (" + workflow +
          ")");
  };

  if (workflow == "simulate") {
    if (!cfg.simulate) bad("simulate workflow needs a 'simulate' section");
    need_seed();
    if (cfg.simulate->n < 1) bad("simulate.n must be >= 1");
    if (cfg.simulate->replications < 1)
      bad("simulate.replications must be >= 1");
  } else if (workflow == "truth") {
    if (!cfg.simulate)
      bad("truth workflow needs a 'simulate' section (hazard model)");
    need_window();
    need_landmarks();
    if (cfg.landmark_grid && !cfg.landmark_grid->to && !cfg.simulate)
      bad("landmark grid needs 'to' when no horizon is available");
  } else if (workflow == "estimate" || workflow == "bootstrap") {
    if (cfg.cohorts.empty()) bad(workflow + " workflow needs 'cohort'");
    need_window();
    need_landmarks();
    if (cfg.methods.empty()) bad("no estimation methods selected");
    if (workflow == "bootstrap") {
      need_seed();
      if (cfg.bootstrap_replicates < 2) bad("bootstrap.replicates must be >= 2");
      if (!(cfg.ci_level > 0.0) || !(cfg.ci_level < 1.0))
        bad("bootstrap.level must be in (0, 1)");
    }
  } else if (workflow == "report") {
    if (cfg.report_inputs.empty()) bad("report workflow needs 'report' inputs");
  } else {
    bad("unknown workflow '" + workflow + "'");
  }
}

}  // namespace lmpaf
