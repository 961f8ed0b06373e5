#include "lmpaf/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lmpaf/errors.hpp"

namespace lmpaf {

namespace {

constexpr double kScoreTol = 1e-8;
constexpr double kCoefBound = 30.0;
constexpr int kMaxIterations = 100;

struct EventBlock {
  double time = 0.0;
  double dw = 0.0;        // weighted event count
  Eigen::VectorXd exsum;  // weighted centered-covariate sum of the events
};

struct Workspace {
  std::vector<EventBlock> events;          // ascending time
  std::vector<std::size_t> by_stop_desc;   // row order, stop descending
  std::vector<std::size_t> by_start_desc;  // row order, start descending
  Eigen::MatrixXd Xc;                      // centered covariates
  Eigen::VectorXd center;
};

// Covariates are centered for numerical stability; the shift cancels in the
// partial likelihood and is undone when the baseline hazard is reported.
Workspace prepare(const CoxData& data) {
  const auto p = data.X.cols();
  Workspace ws;

  ws.center = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    double wsum = 0.0;
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
      ws.center += data.rows[r].weight *
                   data.X.row(static_cast<Eigen::Index>(r)).transpose();
      wsum += data.rows[r].weight;
    }
    if (wsum > 0.0) ws.center /= wsum;
  }
  ws.Xc = data.X;
  for (Eigen::Index j = 0; j < p; ++j)
    ws.Xc.col(j).array() -= ws.center[j];

  std::map<double, EventBlock> blocks;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const CoxRow& row = data.rows[r];
    if (!(row.stop > row.start))
      fail(errc::invalid_argument, "risk interval must satisfy start < stop");
    if (!(row.weight >= 0.0) || !std::isfinite(row.weight))
      fail(errc::invalid_argument, "weights must be finite and nonnegative");
    if (row.event && row.weight > 0.0) {
      auto& b = blocks[row.stop];
      if (b.exsum.size() == 0) b.exsum = Eigen::VectorXd::Zero(p);
      b.time = row.stop;
      b.dw += row.weight;
      if (p > 0)
        b.exsum +=
            row.weight * ws.Xc.row(static_cast<Eigen::Index>(r)).transpose();
    }
  }
  for (auto& [t, b] : blocks) ws.events.push_back(std::move(b));

  ws.by_stop_desc.resize(data.rows.size());
  ws.by_start_desc.resize(data.rows.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i)
    ws.by_stop_desc[i] = ws.by_start_desc[i] = i;
  std::sort(ws.by_stop_desc.begin(), ws.by_stop_desc.end(),
            [&](std::size_t a, std::size_t b) {
              return data.rows[a].stop > data.rows[b].stop;
            });
  std::sort(ws.by_start_desc.begin(), ws.by_start_desc.end(),
            [&](std::size_t a, std::size_t b) {
              return data.rows[a].start > data.rows[b].start;
            });
  return ws;
}

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd info;
  std::vector<double> s0;             // per event block
  std::vector<Eigen::VectorXd> xbar;  // per event block (centered scale)
  double max_eta = 0.0;
};

// One pass over the event grid, descending: a row is at risk for events in
// (start, stop], so riskset sums = (rows with stop >= t) - (rows with
// start >= t), both monotone while t decreases.
Evaluation evaluate(const CoxData& data, const Workspace& ws,
                    const Eigen::VectorXd& beta, bool with_derivatives) {
  const auto p = data.X.cols();
  const std::size_t E = ws.events.size();
  Evaluation ev;
  ev.score = Eigen::VectorXd::Zero(p);
  ev.info = Eigen::MatrixXd::Zero(p, p);
  ev.s0.assign(E, 0.0);
  if (with_derivatives) ev.xbar.assign(E, Eigen::VectorXd::Zero(p));

  Eigen::VectorXd eta =
      p > 0 ? Eigen::VectorXd(ws.Xc * beta)
            : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.rows.size()));
  ev.max_eta = eta.size() > 0 ? eta.cwiseAbs().maxCoeff() : 0.0;

  double add0 = 0.0, sub0 = 0.0;
  Eigen::VectorXd add1 = Eigen::VectorXd::Zero(p),
                  sub1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd add2 = Eigen::MatrixXd::Zero(p, p),
                  sub2 = Eigen::MatrixXd::Zero(p, p);
  std::size_t i_stop = 0, i_start = 0;

  for (std::size_t k = E; k-- > 0;) {
    const double t = ws.events[k].time;
    while (i_stop < ws.by_stop_desc.size() &&
           data.rows[ws.by_stop_desc[i_stop]].stop >= t) {
      std::size_t r = ws.by_stop_desc[i_stop++];
      double v =
          data.rows[r].weight * std::exp(eta[static_cast<Eigen::Index>(r)]);
      add0 += v;
      if (with_derivatives && p > 0) {
        Eigen::VectorXd x = ws.Xc.row(static_cast<Eigen::Index>(r)).transpose();
        add1 += v * x;
        add2.selfadjointView<Eigen::Lower>().rankUpdate(x, v);
      }
    }
    while (i_start < ws.by_start_desc.size() &&
           data.rows[ws.by_start_desc[i_start]].start >= t) {
      std::size_t r = ws.by_start_desc[i_start++];
      double v =
          data.rows[r].weight * std::exp(eta[static_cast<Eigen::Index>(r)]);
      sub0 += v;
      if (with_derivatives && p > 0) {
        Eigen::VectorXd x = ws.Xc.row(static_cast<Eigen::Index>(r)).transpose();
        sub1 += v * x;
        sub2.selfadjointView<Eigen::Lower>().rankUpdate(x, v);
      }
    }
    double s0 = add0 - sub0;
    const EventBlock& b = ws.events[k];
    if (!(s0 > 0.0))
      fail(errc::invalid_argument, "empty risk set at an event time");
    ev.s0[k] = s0;
    ev.loglik += (p > 0 ? beta.dot(b.exsum) : 0.0) - b.dw * std::log(s0);
    if (with_derivatives && p > 0) {
      Eigen::VectorXd s1 = add1 - sub1;
      Eigen::MatrixXd s2 =
          Eigen::MatrixXd(add2.selfadjointView<Eigen::Lower>()) -
          Eigen::MatrixXd(sub2.selfadjointView<Eigen::Lower>());
      Eigen::VectorXd xb = s1 / s0;
      ev.xbar[k] = xb;
      ev.score += b.exsum - b.dw * xb;
      ev.info += b.dw * (s2 / s0 - xb * xb.transpose());
    }
  }
  return ev;
}

}  // namespace

double cox_partial_loglik(const CoxData& data, const Eigen::VectorXd& beta) {
  Workspace ws = prepare(data);
  return evaluate(data, ws, beta, false).loglik;
}

CoxFit fit_cox(const CoxData& data) {
  if (data.rows.empty()) fail(errc::invalid_argument, "no risk intervals");
  const auto p = data.X.cols();
  if (data.X.rows() != static_cast<Eigen::Index>(data.rows.size()))
    fail(errc::invalid_argument, "covariate rows do not match risk intervals");
  Workspace ws = prepare(data);
  if (ws.events.empty())
    fail(errc::invalid_argument, "no events of the target cause");

  for (Eigen::Index j = 0; j < p; ++j) {
    double spread = ws.Xc.col(j).cwiseAbs().maxCoeff();
    if (spread < 1e-12)
      fail(errc::rank_deficient_design,
           "column '" + data.names[static_cast<std::size_t>(j)] +
               "' has no variation");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Evaluation ev = evaluate(data, ws, beta, true);
  int iteration = 0;
  int polish_left = -1;

  for (; iteration < kMaxIterations && p > 0; ++iteration) {
    double max_score = ev.score.cwiseAbs().maxCoeff();
    if (max_score <= kScoreTol) {
      if (polish_left < 0) polish_left = 2;
      if (polish_left == 0 || max_score <= 1e-14) break;
      --polish_left;
    }
    if ((beta.cwiseAbs().maxCoeff() > kCoefBound || ev.max_eta > kCoefBound) &&
        max_score > kScoreTol)
      fail(errc::separation,
           "monotone partial likelihood: coefficient diverged beyond ±" +
               std::to_string(kCoefBound));

    Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.info);
    double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(dmax, 1.0))
      fail(errc::rank_deficient_design,
           "partial-likelihood information is singular");
    Eigen::VectorXd delta = ldlt.solve(ev.score);

    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half, step *= 0.5) {
      Eigen::VectorXd beta_try = beta + step * delta;
      Evaluation ev_try = evaluate(data, ws, beta_try, true);
      if (!std::isfinite(ev_try.loglik)) continue;
      if (ev_try.loglik >= ev.loglik - 1e-12 || polish_left >= 0) {
        beta = std::move(beta_try);
        ev = std::move(ev_try);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (ev.score.cwiseAbs().maxCoeff() <= kScoreTol) break;
      fail(errc::not_converged, "partial-likelihood step-halving exhausted");
    }
  }

  CoxFit fit;
  fit.names = data.names;
  fit.grid_id = data.grid_id;
  fit.coefficients = beta;
  fit.iterations = iteration;
  fit.max_abs_score = p > 0 ? ev.score.cwiseAbs().maxCoeff() : 0.0;
  if (fit.max_abs_score > kScoreTol)
    fail(errc::not_converged,
         "Newton-Raphson did not converge, max |score| = " +
             std::to_string(fit.max_abs_score));
  fit.converged = true;
  fit.loglik = ev.loglik;

  fit.model_covariance =
      p > 0 ? Eigen::MatrixXd(
                  ev.info.ldlt().solve(Eigen::MatrixXd::Identity(p, p)))
            : Eigen::MatrixXd(0, 0);

  // weighted Breslow baseline at covariates == 0 (uncentered scale)
  double shift = p > 0 ? std::exp(-beta.dot(ws.center)) : 1.0;
  fit.baseline_cumhaz.initial_value = 0.0;
  double cum = 0.0;
  for (std::size_t k = 0; k < ws.events.size(); ++k) {
    cum += ws.events[k].dw / ev.s0[k] * shift;
    fit.baseline_cumhaz.times.push_back(ws.events[k].time);
    fit.baseline_cumhaz.values.push_back(cum);
  }

  // robust covariance: per-subject sums of score residuals
  if (p > 0) {
    const std::size_t E = ws.events.size();
    std::vector<double> h0(E + 1, 0.0);
    std::vector<Eigen::VectorXd> h1(E + 1, Eigen::VectorXd::Zero(p));
    std::vector<double> etimes(E);
    for (std::size_t k = 0; k < E; ++k) {
      etimes[k] = ws.events[k].time;
      h0[k + 1] = h0[k] + ws.events[k].dw / ev.s0[k];
      h1[k + 1] = h1[k] + ws.events[k].dw / ev.s0[k] * ev.xbar[k];
    }
    auto upto = [&](double t) {
      return static_cast<std::size_t>(
          std::upper_bound(etimes.begin(), etimes.end(), t) - etimes.begin());
    };
    std::map<double, std::size_t> event_index;
    for (std::size_t k = 0; k < E; ++k) event_index[etimes[k]] = k;

    std::int32_t max_subject = 0;
    for (const auto& r : data.rows)
      max_subject = std::max(max_subject, r.subject);
    std::vector<Eigen::VectorXd> psi(static_cast<std::size_t>(max_subject) + 1,
                                     Eigen::VectorXd::Zero(p));
    Eigen::VectorXd eta = ws.Xc * beta;
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
      const CoxRow& row = data.rows[r];
      if (row.weight == 0.0) continue;
      Eigen::VectorXd x = ws.Xc.row(static_cast<Eigen::Index>(r)).transpose();
      Eigen::VectorXd contrib = Eigen::VectorXd::Zero(p);
      if (row.event) {
        auto it = event_index.find(row.stop);
        if (it != event_index.end())
          contrib += row.weight * (x - ev.xbar[it->second]);
      }
      std::size_t lo = upto(row.start), hi = upto(row.stop);
      if (hi > lo) {
        double we = row.weight * std::exp(eta[static_cast<Eigen::Index>(r)]);
        contrib -= we * ((h0[hi] - h0[lo]) * x - (h1[hi] - h1[lo]));
      }
      psi[static_cast<std::size_t>(row.subject)] += contrib;
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
    for (const auto& v : psi) meat += v * v.transpose();
    fit.covariance = fit.model_covariance * meat * fit.model_covariance;
  } else {
    fit.covariance = Eigen::MatrixXd(0, 0);
  }
  return fit;
}

}  // namespace lmpaf
