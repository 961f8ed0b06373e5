#include "lmpaf/simulator.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "lmpaf/errors.hpp"
#include "lmpaf/event_data.hpp"
#include "lmpaf/rng.hpp"

namespace lmpaf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string subject_name(std::int64_t index, std::int64_t n) {
  int width = 1;
  for (std::int64_t v = n; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index + 1);
  return "s" + std::string(width - static_cast<int>(digits.size()), '0') +
         digits;
}

}  // namespace

ValidatedCohort simulate_cohort(const HazardModelSpec& model,
                                const SimConfig& cfg) {
  if (cfg.n < 1) fail(errc::invalid_argument, "subject count must be >= 1");
  if (!(cfg.horizon > 0.0))
    fail(errc::invalid_argument, "horizon must be positive");
  if (cfg.censoring_rate && !(*cfg.censoring_rate > 0.0))
    fail(errc::invalid_argument, "censoring rate must be positive when set");

  const HazardSpec initial_exits[3] = {model.a01, model.a02, model.a03};
  const HazardSpec exposed_exits[2] = {model.a14, model.a15};

  std::vector<SubjectRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.n));

  for (std::int64_t i = 0; i < cfg.n; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    SubjectRecord rec;
    rec.subject_id = subject_name(i, cfg.n);
    rec.entry_time = 0.0;

    double t1 =
        invert_cumulative_hazard(initial_exits, 3, 0.0, -std::log(rng.uniform_pos()));
    if (t1 > cfg.horizon) {
      rec.final_time = cfg.horizon;
      rec.event_type = EventType::Censored;  // event-free at the horizon
    } else {
      double r01 = hazard_eval(model.a01, t1);
      double r02 = hazard_eval(model.a02, t1);
      double r03 = hazard_eval(model.a03, t1);
      double total = r01 + r02 + r03;
      double v = rng.uniform() * total;
      if (v < r01) {
        rec.exposure_time = t1;
        double t2 = t1 + invert_cumulative_hazard(exposed_exits, 2, t1,
                                                  -std::log(rng.uniform_pos()));
        if (t2 > cfg.horizon) {
          rec.final_time = cfg.horizon;
          rec.event_type = EventType::Censored;
        } else {
          double r14 = hazard_eval(model.a14, t2);
          double r15 = hazard_eval(model.a15, t2);
          rec.final_time = t2;
          rec.event_type = rng.uniform() * (r14 + r15) < r14
                               ? EventType::EventOfInterest
                               : EventType::CompetingEvent;
        }
      } else {
        rec.final_time = t1;
        rec.event_type = v < r01 + r02 ? EventType::EventOfInterest
                                       : EventType::CompetingEvent;
      }
    }

    if (cfg.censoring_rate) {
      double tc = -std::log(rng.uniform_pos()) / *cfg.censoring_rate;
      if (tc < rec.final_time) {
        rec.final_time = tc;
        rec.event_type = EventType::Censored;
        if (rec.exposure_time && *rec.exposure_time > tc)
          rec.exposure_time.reset();
      }
    }
    records.push_back(std::move(rec));
  }

  return validate_cohort(std::move(records), CovariateSchema{}, cfg.horizon,
                         cfg.censoring_rate.has_value());
}

namespace {

using State = std::array<double, 4>;  // initial, exposed, event, competing

struct ForwardEquations {
  const HazardModelSpec* model;

  void operator()(const State& y, State& dydt, double t) const {
    double r01 = hazard_eval(model->a01, t);
    double r02 = hazard_eval(model->a02, t);
    double r03 = hazard_eval(model->a03, t);
    double r14 = hazard_eval(model->a14, t);
    double r15 = hazard_eval(model->a15, t);
    dydt[0] = -(r01 + r02 + r03) * y[0];
    dydt[1] = r01 * y[0] - (r14 + r15) * y[1];
    dydt[2] = r02 * y[0] + r14 * y[1];
    dydt[3] = r03 * y[0] + r15 * y[1];
  }
};

bool singular_at_zero(const HazardModelSpec& m) {
  auto sing = [](const HazardSpec& s) {
    return s.kind == HazardSpec::Kind::Weibull && s.shape < 1.0;
  };
  return sing(m.a01) || sing(m.a02) || sing(m.a03) || sing(m.a14) ||
         sing(m.a15);
}

// Advances the state across [t0, t0+eps] analytically with first-order
// destination allocation; used to step off the t=0 hazard singularity of
// shape<1 Weibulls. eps is chosen so the allocation error is O(1e-18).
double analytic_bootstrap(const HazardModelSpec& m, State& y, double t0) {
  const HazardSpec all[5] = {m.a01, m.a02, m.a03, m.a14, m.a15};
  double eps = invert_cumulative_hazard(all, 5, t0, 1e-9);
  eps = std::min(eps, 1e-6);
  if (!(eps > 0.0)) eps = 1e-12;

  double d01 = cumulative_hazard(m.a01, t0, t0 + eps);
  double d02 = cumulative_hazard(m.a02, t0, t0 + eps);
  double d03 = cumulative_hazard(m.a03, t0, t0 + eps);
  double d14 = cumulative_hazard(m.a14, t0, t0 + eps);
  double d15 = cumulative_hazard(m.a15, t0, t0 + eps);

  double exit0 = d01 + d02 + d03;
  double leave0 = -std::expm1(-exit0);
  double stay0 = std::exp(-exit0);
  double exit1 = d14 + d15;
  double leave1 = -std::expm1(-exit1);
  double stay1 = std::exp(-exit1);

  double y0 = y[0], y1 = y[1];
  y[0] = y0 * stay0;
  y[1] = y1 * stay1 + (exit0 > 0.0 ? y0 * leave0 * d01 / exit0 : 0.0);
  y[2] += (exit0 > 0.0 ? y0 * leave0 * d02 / exit0 : 0.0) +
          (exit1 > 0.0 ? y1 * leave1 * d14 / exit1 : 0.0);
  y[3] += (exit0 > 0.0 ? y0 * leave0 * d03 / exit0 : 0.0) +
          (exit1 > 0.0 ? y1 * leave1 * d15 / exit1 : 0.0);
  return t0 + eps;
}

void integrate_window(const HazardModelSpec& model, State& y, double t0,
                      double t1) {
  if (t1 <= t0) return;
  namespace ode = boost::numeric::odeint;
  if (t0 == 0.0 && singular_at_zero(model)) t0 = analytic_bootstrap(model, y, t0);
  if (t1 <= t0) return;
  auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-12, 1e-12);
  ode::integrate_adaptive(stepper, ForwardEquations{&model}, y, t0, t1,
                          std::min(0.05, (t1 - t0) / 16.0));
}

StateProbs to_probs(const State& y) {
  return StateProbs{y[0], y[1], y[2], y[3]};
}

HazardModelSpec without_acquisition(const HazardModelSpec& model) {
  HazardModelSpec m = model;
  m.a01.kind = HazardSpec::Kind::Constant;
  m.a01.rate = 0.0;
  return m;
}

struct WindowRisks {
  double factual_unexposed = 0.0;   // event risk, initial at l, model as-is
  double factual_exposed = 0.0;     // event risk, exposed at l
  double counterfactual = 0.0;      // initial at l, acquisition zeroed
};

WindowRisks window_risks(const HazardModelSpec& model, double l, double h) {
  WindowRisks r;
  State y{1.0, 0.0, 0.0, 0.0};
  integrate_window(model, y, l, l + h);
  r.factual_unexposed = y[2];
  y = {0.0, 1.0, 0.0, 0.0};
  integrate_window(model, y, l, l + h);
  r.factual_exposed = y[2];
  HazardModelSpec blocked = without_acquisition(model);
  y = {1.0, 0.0, 0.0, 0.0};
  integrate_window(blocked, y, l, l + h);
  r.counterfactual = y[2];
  return r;
}

double paf_from(const StateProbs& at_l, const WindowRisks& risks,
                PafVariant variant) {
  double at_risk = at_l.initial + at_l.exposed;
  if (!(at_risk > 0.0))
    fail(errc::degenerate_inputs, "no probability mass at risk at landmark");
  double prevalence = at_l.exposed / at_risk;
  double marginal = prevalence * risks.factual_exposed +
                    (1.0 - prevalence) * risks.factual_unexposed;
  if (!(marginal > 0.0))
    fail(errc::zero_marginal_risk, "window event risk is zero");
  double reference = variant == PafVariant::AtLandmark
                         ? risks.factual_unexposed
                         : risks.counterfactual;
  return (marginal - reference) / marginal;
}

}  // namespace

StateProbs true_transition_probabilities(const HazardModelSpec& model,
                                         double s, double t,
                                         bool from_exposed) {
  if (s < 0.0 || t < s)
    fail(errc::invalid_argument, "need 0 <= s <= t");
  State y{from_exposed ? 0.0 : 1.0, from_exposed ? 1.0 : 0.0, 0.0, 0.0};
  integrate_window(model, y, s, t);
  return to_probs(y);
}

double true_paf(const HazardModelSpec& model, double l, double h,
                PafVariant variant) {
  if (l < 0.0 || !(h > 0.0))
    fail(errc::invalid_argument, "need l >= 0 and h > 0");
  StateProbs at_l = true_transition_probabilities(model, 0.0, l, false);
  return paf_from(at_l, window_risks(model, l, h), variant);
}

std::vector<TruePafPoint> true_paf_curve(const HazardModelSpec& model,
                                         const std::vector<double>& landmarks,
                                         double h) {
  std::vector<double> sorted = landmarks;
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty() && sorted.front() < 0.0)
    fail(errc::invalid_argument, "negative landmark");

  std::vector<TruePafPoint> out;
  out.reserve(sorted.size());
  State y{1.0, 0.0, 0.0, 0.0};
  double t = 0.0;
  for (double l : sorted) {
    integrate_window(model, y, t, l);
    t = std::max(t, l);
    StateProbs at_l = to_probs(y);
    WindowRisks risks = window_risks(model, l, h);
    out.push_back({l, paf_from(at_l, risks, PafVariant::AtLandmark),
                   paf_from(at_l, risks, PafVariant::Window)});
  }
  return out;
}

}  // namespace lmpaf
