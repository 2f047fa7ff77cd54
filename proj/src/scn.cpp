#include "confignet/scn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace confignet {

namespace {

XiScore score_from_parts(std::span<const double> eh, double hh, std::span<const double> ee,
                         double threshold) {
  XiScore s;
  s.per_output.resize(eh.size());
  for (std::size_t q = 0; q < eh.size(); ++q) {
    s.per_output[q] = eh[q] * eh[q] / hh - threshold * ee[q];
    s.total += s.per_output[q];
  }
  return s;
}

void append_beta_rows(ScnState& state, const Matrix& rows, std::size_t first_row) {
  // Rows [first_row, L) of beta are replaced by `rows`; earlier rows are kept.
  const std::size_t m = state.targets.cols();
  std::vector<double> entries(state.beta.data().begin(),
                              state.beta.data().begin() + static_cast<std::ptrdiff_t>(first_row * m));
  entries.insert(entries.end(), rows.data().begin(), rows.data().end());
  state.beta = Matrix(first_row + rows.rows(), m, std::move(entries));
}

void refresh_residual(ScnState& state) {
  state.residual = subtract(state.targets, matmul(state.activations(), state.beta));
}

}  // namespace

std::string to_string(ScnScheme scheme) {
  switch (scheme) {
    case ScnScheme::sc1: return "sc1";
    case ScnScheme::sc2: return "sc2";
    case ScnScheme::sc3: return "sc3";
  }
  return "sc3";
}

void ScnConfig::validate() const {
  if (!(r > 0.0 && r < 1.0)) throw InvalidInput("scn: r must lie in (0, 1)");
  if (lambda_grid.empty()) throw InvalidInput("scn: lambda grid is empty");
  for (double l : lambda_grid)
    if (!(l > 0.0)) throw InvalidInput("scn: lambda values must be positive");
  if (!(epsilon >= 0.0)) throw InvalidInput("scn: epsilon must be non-negative");
  if (window == 0) throw InvalidInput("scn: window must be at least 1");
  if (t_max == 0) throw InvalidInput("scn: t_max must be at least 1");
}

double XiScore::min() const {
  return per_output.empty() ? 0.0 : *std::min_element(per_output.begin(), per_output.end());
}

XiScore sc_xi(std::span<const double> h, const Matrix& residual, double r, double mu) {
  if (h.size() != residual.rows()) throw InvalidInput("sc_xi: candidate length mismatch");
  if (!(r > 0.0 && r < 1.0)) throw InvalidInput("sc_xi: r must lie in (0, 1)");
  if (mu < 0.0) throw InvalidInput("sc_xi: mu must be non-negative");
  const double hh = inner(h, h);
  if (hh == 0.0) throw InvalidInput("sc_xi: zero candidate vector");
  const auto eh = column_inner(residual, h);
  const auto ee = column_sq_norms(residual);
  return score_from_parts(eh, hh, ee, 1.0 - r - mu);
}

double scn_mu(double r, std::size_t node_index) {
  return (1.0 - r) / static_cast<double>(node_index + 1);
}

ScnState::ScnState(Matrix t) : targets(t), beta(0, t.cols()), residual(std::move(t)) {}

Matrix ScnState::activations() const { return from_columns(columns, targets.rows()); }

CandidateRecord configure_node_scn(const ScnState& state, const Matrix& x, const ScnConfig& config,
                                   Rng& rng) {
  const std::size_t node_index = state.size() + 1;
  const auto ee = column_sq_norms(state.residual);
  double r = config.r;
  double best_seen_xi = -std::numeric_limits<double>::infinity();
  double best_seen_norm = 0.0;

  for (std::size_t attempt = 0;; ++attempt) {
    const double mu = scn_mu(r, node_index);
    const double threshold = 1.0 - r - mu;
    std::optional<CandidateRecord> best;
    for (double lambda : config.lambda_grid) {
      for (std::size_t k = 0; k < config.t_max; ++k) {
        HiddenNode node = draw_node(rng, x.cols(), lambda);
        Vector h = hidden_output(node, x, Activation::sigmoid);
        const double hh = inner(h, h);
        if (hh == 0.0) continue;
        best_seen_norm = std::max(best_seen_norm, std::sqrt(hh));
        const auto score = score_from_parts(column_inner(state.residual, h), hh, ee, threshold);
        best_seen_xi = std::max(best_seen_xi, score.total);
        if (score.min() < 0.0) continue;
        if (!best || score.total > best->xi) {
          best = CandidateRecord{std::move(node), std::move(h), score.total, score.min(), lambda,
                                 r, mu, attempt};
        }
      }
    }
    if (best) return *std::move(best);
    if (attempt >= config.max_r_retries) break;
    r = escalate_r(r, rng, config.escalation);
  }
  throw ConfigurationFailure("no candidate satisfied the supervisory test for node " +
                                 std::to_string(node_index),
                             best_seen_xi, best_seen_norm);
}

Matrix update_weights_sc1(ScnState& state, const CandidateRecord& candidate) {
  const double hh = inner(candidate.h, candidate.h);
  const auto eh = column_inner(state.residual, candidate.h);
  Matrix row(1, eh.size());
  for (std::size_t q = 0; q < eh.size(); ++q) row(0, q) = eh[q] / hh;

  for (std::size_t i = 0; i < state.residual.rows(); ++i) {
    auto e = state.residual.row(i);
    for (std::size_t q = 0; q < e.size(); ++q) e[q] -= candidate.h[i] * row(0, q);
  }
  append_beta_rows(state, row, state.size());
  state.nodes.push_back(candidate.node);
  state.columns.push_back(candidate.h);
  return row;
}

Matrix update_weights_sc2(ScnState& state, const CandidateRecord& candidate, std::size_t window) {
  if (window == 0) throw InvalidInput("sc2: window must be at least 1");
  state.nodes.push_back(candidate.node);
  state.columns.push_back(candidate.h);
  const std::size_t l = state.size();
  const std::size_t k = std::min(window, l);
  const std::size_t frozen = l - k;

  // Target left over by the frozen older nodes.
  Matrix target = state.targets;
  for (std::size_t j = 0; j < frozen; ++j) {
    const auto& h = state.columns[j];
    for (std::size_t i = 0; i < target.rows(); ++i) {
      auto t = target.row(i);
      for (std::size_t q = 0; q < t.size(); ++q) t[q] -= h[i] * state.beta(j, q);
    }
  }
  const Matrix recent = from_columns(std::span<const Vector>(state.columns).subspan(frozen),
                                     state.targets.rows());
  Matrix rows = lstsq_pinv(recent, target);
  append_beta_rows(state, rows, frozen);
  state.residual = subtract(target, matmul(recent, rows));
  return rows;
}

Matrix update_weights_sc3(ScnState& state, const CandidateRecord& candidate) {
  state.nodes.push_back(candidate.node);
  state.columns.push_back(candidate.h);
  state.beta = lstsq_pinv(state.activations(), state.targets);
  refresh_residual(state);
  return state.beta;
}

TrainResult train_scn(const Dataset& ds, const ScnConfig& config) {
  config.validate();
  validate_training_data(ds.x, ds.t);
  const auto start = std::chrono::steady_clock::now();

  ScnState state(ds.t);
  Rng rng(config.seed);
  TrialReport report;
  report.algorithm = to_string(config.scheme);
  report.seed = config.seed;

  while (state.size() < config.l_max && residual_rmse(state.residual) > config.epsilon) {
    CandidateRecord candidate;
    try {
      candidate = configure_node_scn(state, ds.x, config, rng);
    } catch (const ConfigurationFailure& failure) {
      report.failed = true;
      report.flags.push_back(std::string("configuration_failure: ") + failure.what());
      break;
    }
    switch (config.scheme) {
      case ScnScheme::sc1: update_weights_sc1(state, candidate); break;
      case ScnScheme::sc2: update_weights_sc2(state, candidate, config.window); break;
      case ScnScheme::sc3: update_weights_sc3(state, candidate); break;
    }
    const double now = residual_rmse(state.residual);
    // The pinv cutoff drops near-collinear directions, which can cost fit.
    if (!report.residual_history.empty() && now > report.residual_history.back())
      report.flags.push_back("numeric: residual grew at node " +
                             std::to_string(report.residual_history.size() + 1) +
                             " after a truncated refit");
    report.residual_history.push_back(now);
    report.accepted_lambda.push_back(candidate.lambda);
    report.tau_trace.push_back(candidate.r + candidate.mu);
    report.escalation_events += candidate.escalations;
  }

  TrainResult result;
  result.model.nodes = state.nodes;
  result.model.beta = state.beta;
  result.model.d = ds.inputs();
  result.model.m = ds.outputs();
  report.nodes_used = state.size();
  report.train_rmse = residual_rmse(state.residual);
  report.train_rmse_per_output = residual_rmse_per_output(state.residual);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = std::move(report);
  return result;
}

}  // namespace confignet
