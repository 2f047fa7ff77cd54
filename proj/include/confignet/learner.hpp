#pragma once

#include "confignet/linalg.hpp"
#include "confignet/network.hpp"
#include "confignet/random.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace confignet {

/// How r is pushed towards 1 when no candidate passes a full scope sweep.
enum class EscalationRule {
  interval,   // step drawn uniformly from [(1-r)/2, 1-r)
  two_point,  // step is (1-r)/2 or 1-r with equal probability
};

std::string to_string(EscalationRule rule);
EscalationRule escalation_from_string(const std::string& name);

/// Largest r admitted after escalation.
inline constexpr double kMaxEscalatedR = 1.0 - 1e-12;

/// r <- r + step with the step drawn per `rule`, clamped to kMaxEscalatedR.
double escalate_r(double r, Rng& rng, EscalationRule rule);

/// No candidate passed the supervisory test for any scope in the grid.
class ConfigurationFailure : public std::runtime_error {
public:
  ConfigurationFailure(const std::string& what, double best_xi, double best_v_norm)
      : std::runtime_error(what), best_xi_(best_xi), best_v_norm_(best_v_norm) {}

  /// Largest xi_total seen among scored candidates (-inf when none was scored).
  double best_xi() const noexcept { return best_xi_; }
  /// Largest candidate norm seen (orthogonalized for OSCN, raw for SCN).
  double best_v_norm() const noexcept { return best_v_norm_; }

private:
  double best_xi_;
  double best_v_norm_;
};

/// Invariant measurements collected while training an orthogonal model.
struct OrthoDiagnostics {
  double max_basis_orthogonality = 0.0;     // max |<v_i,v_j>| / (|v_i| |v_j|)
  double max_residual_orthogonality = 0.0;  // max |<e_q,v_j>| / (|e| |v_j|)
  double reconstruction_error = 0.0;        // |H - V R| / |H|
  double finalize_error = 0.0;              // |H beta_raw - V beta_ortho| / |V beta_ortho|
  double least_squares_gap = 0.0;           // relative gap to the pinv residual on V
  double min_basis_norm = 0.0;
  std::size_t contraction_violations = 0;
  std::size_t bound_violations = 0;
  std::size_t reorthogonalizations = 0;
};

/// Outcome of one training run. Test-set fields are filled in by the harness.
struct TrialReport {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::size_t nodes_used = 0;
  std::vector<double> residual_history;  // training RMSE after each accepted node
  std::vector<double> accepted_lambda;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  std::vector<double> train_rmse_per_output;
  std::vector<double> test_rmse_per_output;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
  double wall_time_seconds = 0.0;
  std::size_t escalation_events = 0;
  std::vector<double> tau_trace;    // r + mu in force when each node was accepted
  std::vector<double> bound_trace;  // squared-residual ceiling per node (OSCN)
  std::optional<OrthoDiagnostics> ortho;
  /// Set when training stopped on a hard failure.
  bool failed = false;
  std::vector<std::string> flags;
};

struct TrainResult {
  NetworkModel model;
  TrialReport report;
};

/// Draws one node with every weight and the bias uniform on [-lambda, lambda):
/// d consecutive deviates for w, then one for b.
HiddenNode draw_node(Rng& rng, std::size_t input_dim, double lambda);

/// sqrt(sum of squares / (rows * cols)).
double residual_rmse(const Matrix& residual);

/// Column-wise RMSE of a residual matrix.
std::vector<double> residual_rmse_per_output(const Matrix& residual);

/// <e_q, v> for every column q of a row-major residual.
std::vector<double> column_inner(const Matrix& residual, std::span<const double> v);

/// <e_q, e_q> for every column q.
std::vector<double> column_sq_norms(const Matrix& residual);

void validate_training_data(const Matrix& x, const Matrix& t);

}  // namespace confignet
