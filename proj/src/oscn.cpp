#include "confignet/oscn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace confignet {

namespace {

// Rounding allowance on squared-residual comparisons.
constexpr double kContractionSlack = 1e-12;
constexpr double kBasisOrthogonalityTol = 1e-9;
constexpr double kResidualOrthogonalityTol = 1e-8;

double relative_gap(double value, double reference, double floor) {
  return std::abs(value - reference) / std::max(reference, floor);
}

}  // namespace

void OscnConfig::validate() const {
  if (!(sigma > 0.0)) throw InvalidInput("oscn: sigma must be positive");
  if (!(epsilon >= 0.0)) throw InvalidInput("oscn: epsilon must be non-negative");
  if (lambda_grid.empty()) throw InvalidInput("oscn: lambda grid is empty");
  for (double l : lambda_grid)
    if (!(l > 0.0)) throw InvalidInput("oscn: lambda values must be positive");
  if (t_max == 0) throw InvalidInput("oscn: t_max must be at least 1");
}

AdaptiveParams adaptive_params(std::size_t l) {
  if (l == 0) throw InvalidInput("adaptive_params: node index starts at 1");
  const double lp1 = static_cast<double>(l + 1);
  AdaptiveParams p;
  p.l = l;
  p.r = static_cast<double>(l) / lp1;
  p.mu = (1.0 - p.r) / lp1;
  p.tau = p.r + p.mu;
  return p;
}

AdaptiveParams escalate(const AdaptiveParams& params, Rng& rng, EscalationRule rule) {
  AdaptiveParams next = params;
  next.r = escalate_r(params.r, rng, rule);
  next.mu = (1.0 - next.r) / static_cast<double>(params.l + 1);
  next.tau = next.r + next.mu;
  return next;
}

double error_bound(std::size_t l, double e0_sq) {
  if (l == 0) throw InvalidInput("error_bound: L must be at least 1");
  const double ld = static_cast<double>(l);
  return 2.0 / (ld + 2.0) * std::exp(ld / (ld + 1.0)) * e0_sq;
}

Orthogonalized orthogonalize(std::span<const double> h, std::span<const Vector> basis,
                             std::span<const double> sq_norms) {
  if (sq_norms.size() != basis.size()) throw InvalidInput("orthogonalize: norm cache size mismatch");
  Orthogonalized out;
  out.v.assign(h.begin(), h.end());
  out.coeffs.resize(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].size() != h.size()) throw InvalidInput("orthogonalize: basis column length mismatch");
    if (!(sq_norms[j] > 0.0)) {
      throw ConsistencyError("orthogonalize: stored column " + std::to_string(j) + " has zero norm");
    }
    out.coeffs[j] = inner(basis[j], h) / sq_norms[j];
  }
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const double c = out.coeffs[j];
    const auto& vj = basis[j];
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= c * vj[i];
  }

  const double vv = inner(out.v, out.v);
  if (basis.empty() || vv == 0.0) return out;
  std::vector<double> overlap(basis.size());
  double worst = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    overlap[j] = inner(basis[j], out.v);
    worst = std::max(worst, std::abs(overlap[j]) / std::sqrt(sq_norms[j] * vv));
  }
  if (worst > kReorthogonalizeAbove) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double c = overlap[j] / sq_norms[j];
      const auto& vj = basis[j];
      for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= c * vj[i];
      out.coeffs[j] += c;
    }
    out.reorthogonalized = true;
  }
  return out;
}

Orthogonalized orthogonalize(std::span<const double> h, const Matrix& basis) {
  if (basis.cols() > 0 && basis.rows() != h.size()) {
    throw InvalidInput("orthogonalize: basis row count differs from candidate length");
  }
  std::vector<Vector> columns(basis.cols());
  std::vector<double> sq(basis.cols());
  for (std::size_t j = 0; j < basis.cols(); ++j) {
    columns[j] = basis.col(j);
    sq[j] = inner(columns[j], columns[j]);
  }
  return orthogonalize(h, columns, sq);
}

XiScore xi_score(std::span<const double> v, const Matrix& residual, const AdaptiveParams& params) {
  if (v.size() != residual.rows()) throw InvalidInput("xi_score: vector length mismatch");
  const double vv = inner(v, v);
  if (vv == 0.0) throw InvalidInput("xi_score: zero vector");
  const auto ev = column_inner(residual, v);
  const auto ee = column_sq_norms(residual);
  const double threshold = 1.0 - params.r - params.mu;
  XiScore s;
  s.per_output.resize(ev.size());
  for (std::size_t q = 0; q < ev.size(); ++q) {
    s.per_output[q] = ev[q] * ev[q] / vv - threshold * ee[q];
    s.total += s.per_output[q];
  }
  return s;
}

std::vector<double> beta_update(const Matrix& residual, std::span<const double> v) {
  if (v.size() != residual.rows()) throw InvalidInput("beta_update: vector length mismatch");
  const double vv = inner(v, v);
  if (vv == 0.0) throw InvalidInput("beta_update: zero vector");
  auto beta = column_inner(residual, v);
  for (auto& b : beta) b /= vv;
  return beta;
}

OscnCandidate configure_node_oscn(const OrthoState& state, const Matrix& x,
                                  const OscnConfig& config, Rng& rng) {
  AdaptiveParams params = adaptive_params(state.size() + 1);
  const auto ee = column_sq_norms(state.residual());
  double best_seen_xi = -std::numeric_limits<double>::infinity();
  double best_seen_norm = 0.0;

  for (std::size_t attempt = 0;; ++attempt) {
    const double threshold = 1.0 - params.r - params.mu;
    std::optional<OscnCandidate> best;
    for (double lambda : config.lambda_grid) {
      for (std::size_t k = 0; k < config.t_max; ++k) {
        HiddenNode node = draw_node(rng, x.cols(), lambda);
        const Vector h = hidden_output(node, x, Activation::sigmoid);
        Orthogonalized ortho = orthogonalize(h, state.basis(), state.basis_sq_norms());
        const double vv = inner(ortho.v, ortho.v);
        const double v_norm = std::sqrt(vv);
        best_seen_norm = std::max(best_seen_norm, v_norm);
        if (!(v_norm >= config.sigma)) continue;

        const auto ev = column_inner(state.residual(), ortho.v);
        XiScore score;
        score.per_output.resize(ev.size());
        for (std::size_t q = 0; q < ev.size(); ++q) {
          score.per_output[q] = ev[q] * ev[q] / vv - threshold * ee[q];
          score.total += score.per_output[q];
        }
        best_seen_xi = std::max(best_seen_xi, score.total);
        if (score.min() < 0.0) continue;
        if (!best || score.total > best->xi.total) {
          best = OscnCandidate{std::move(node), std::move(ortho), std::move(score), lambda, params,
                               attempt};
        }
      }
    }
    if (best) return *std::move(best);
    if (attempt >= config.max_r_retries) break;
    params = escalate(params, rng, config.escalation);
  }
  throw ConfigurationFailure("no orthogonal candidate passed for node " +
                                 std::to_string(state.size() + 1) + " after " +
                                 std::to_string(config.max_r_retries) + " r escalations",
                             best_seen_xi, best_seen_norm);
}

OscnResult train_oscn(const Dataset& ds, const OscnConfig& config) {
  config.validate();
  validate_training_data(ds.x, ds.t);
  const auto start = std::chrono::steady_clock::now();

  OrthoState state(ds.t);
  std::vector<HiddenNode> nodes;
  Rng rng(config.seed);
  TrialReport report;
  report.algorithm = "oscn";
  report.seed = config.seed;
  OrthoDiagnostics diag;
  diag.min_basis_norm = std::numeric_limits<double>::infinity();

  const double e0_norm = frob_norm(ds.t);
  const double e0_sq = e0_norm * e0_norm;
  bool escalated = false;

  while (state.size() < config.l_max && residual_rmse(state.residual()) > config.epsilon) {
    OscnCandidate candidate;
    try {
      candidate = configure_node_oscn(state, ds.x, config, rng);
    } catch (const ConfigurationFailure& failure) {
      report.failed = true;
      report.flags.push_back(std::string("configuration_failure: ") + failure.what());
      break;
    }
    const Vector& v = candidate.ortho.v;
    const double v_norm = norm(v);
    for (std::size_t j = 0; j < state.size(); ++j) {
      const double ratio = std::abs(inner(state.basis()[j], v)) /
                           (std::sqrt(state.basis_sq_norms()[j]) * v_norm);
      diag.max_basis_orthogonality = std::max(diag.max_basis_orthogonality, ratio);
    }
    diag.min_basis_norm = std::min(diag.min_basis_norm, v_norm);
    if (candidate.ortho.reorthogonalized) ++diag.reorthogonalizations;

    const double prev_sq = std::pow(frob_norm(state.residual()), 2);
    const auto beta = beta_update(state.residual(), v);
    state.append(candidate.ortho.v, candidate.ortho.coeffs, beta);
    nodes.push_back(candidate.node);
    const double e_norm = frob_norm(state.residual());
    const double new_sq = e_norm * e_norm;

    if (candidate.escalations > 0) {
      escalated = true;
      report.escalation_events += candidate.escalations;
    }
    if (new_sq > candidate.params.tau * prev_sq + kContractionSlack * prev_sq) {
      ++diag.contraction_violations;
    }
    const double bound = error_bound(state.size(), e0_sq);
    report.bound_trace.push_back(bound);
    if (!escalated && new_sq > bound * (1.0 + kContractionSlack)) ++diag.bound_violations;

    for (std::size_t j = 0; j < state.size(); ++j) {
      const double vj_norm = std::sqrt(state.basis_sq_norms()[j]);
      for (double ev : column_inner(state.residual(), state.basis()[j])) {
        if (e_norm == 0.0) continue;
        diag.max_residual_orthogonality =
            std::max(diag.max_residual_orthogonality, std::abs(ev) / (e_norm * vj_norm));
      }
    }

    report.residual_history.push_back(residual_rmse(state.residual()));
    report.accepted_lambda.push_back(candidate.lambda);
    report.tau_trace.push_back(candidate.params.tau);
  }

  OscnResult result{finalize(state, nodes, Activation::sigmoid, ds.inputs()), {}, state};

  if (state.size() > 0) {
    diag.reconstruction_error = reconstruction_error(state, nodes, ds.x, Activation::sigmoid);
    const Matrix basis = state.basis_matrix();
    const Matrix fitted = matmul(basis, state.beta_ortho());
    const double fitted_norm = frob_norm(fitted);
    diag.finalize_error = frob_norm(subtract(predict(result.model, ds.x), fitted)) /
                          std::max(fitted_norm, std::numeric_limits<double>::min());
    const double constructive = frob_norm(subtract(ds.t, fitted));
    const double oracle =
        frob_norm(subtract(ds.t, matmul(basis, lstsq_pinv(basis, ds.t))));
    diag.least_squares_gap = relative_gap(constructive, oracle, 1e-12 * e0_norm);
  } else {
    diag.min_basis_norm = 0.0;
  }

  if (diag.max_basis_orthogonality > kBasisOrthogonalityTol) {
    report.flags.push_back("invariant: basis orthogonality exceeded tolerance");
  }
  if (diag.max_residual_orthogonality > kResidualOrthogonalityTol) {
    report.flags.push_back("invariant: residual not orthogonal to basis");
  }
  if (diag.contraction_violations > 0) report.flags.push_back("invariant: contraction violated");
  if (diag.bound_violations > 0) report.flags.push_back("warning: error bound exceeded");

  report.nodes_used = state.size();
  report.train_rmse = residual_rmse(state.residual());
  report.train_rmse_per_output = residual_rmse_per_output(state.residual());
  report.ortho = diag;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = std::move(report);
  return result;
}

}  // namespace confignet
