#include "confignet/learner.hpp"

#include <algorithm>
#include <cmath>

namespace confignet {

std::string to_string(EscalationRule rule) {
  return rule == EscalationRule::interval ? "interval" : "two_point";
}

EscalationRule escalation_from_string(const std::string& name) {
  if (name == "interval") return EscalationRule::interval;
  if (name == "two_point") return EscalationRule::two_point;
  throw InvalidInput("unknown escalation rule '" + name + "'");
}

double escalate_r(double r, Rng& rng, EscalationRule rule) {
  const double gap = 1.0 - r;
  const double step = rule == EscalationRule::interval
                          ? rng.uniform(0.5 * gap, gap)
                          : (rng.canonical() < 0.5 ? 0.5 * gap : gap);
  return std::min(r + step, kMaxEscalatedR);
}

HiddenNode draw_node(Rng& rng, std::size_t input_dim, double lambda) {
  HiddenNode node;
  node.w.resize(input_dim);
  for (auto& w : node.w) w = rng.uniform(-lambda, lambda);
  node.b = rng.uniform(-lambda, lambda);
  return node;
}

double residual_rmse(const Matrix& residual) {
  const auto count = residual.rows() * residual.cols();
  if (count == 0) return 0.0;
  const double n = frob_norm(residual);
  return std::sqrt(n * n / static_cast<double>(count));
}

std::vector<double> residual_rmse_per_output(const Matrix& residual) {
  auto sq = column_sq_norms(residual);
  for (auto& s : sq) s = residual.rows() ? std::sqrt(s / static_cast<double>(residual.rows())) : 0.0;
  return sq;
}

std::vector<double> column_inner(const Matrix& residual, std::span<const double> v) {
  if (v.size() != residual.rows()) throw InvalidInput("column_inner: length mismatch");
  std::vector<double> out(residual.cols(), 0.0);
  for (std::size_t i = 0; i < residual.rows(); ++i) {
    const auto row = residual.row(i);
    for (std::size_t q = 0; q < row.size(); ++q) out[q] += row[q] * v[i];
  }
  return out;
}

std::vector<double> column_sq_norms(const Matrix& residual) {
  std::vector<double> out(residual.cols(), 0.0);
  for (std::size_t i = 0; i < residual.rows(); ++i) {
    const auto row = residual.row(i);
    for (std::size_t q = 0; q < row.size(); ++q) out[q] += row[q] * row[q];
  }
  return out;
}

void validate_training_data(const Matrix& x, const Matrix& t) {
  if (x.rows() != t.rows()) throw InvalidInput("inputs and targets have different row counts");
  if (t.cols() == 0) throw InvalidInput("targets have no columns");
  require_finite(x, "inputs");
  require_finite(t, "targets");
}

}  // namespace confignet
