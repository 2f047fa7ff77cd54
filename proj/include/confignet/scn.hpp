#pragma once

#include "confignet/dataset.hpp"
#include "confignet/learner.hpp"

#include <cstdint>
#include <vector>

namespace confignet {

/// Output-weight scheme: new node only, sliding-window refit, global refit.
enum class ScnScheme { sc1, sc2, sc3 };

std::string to_string(ScnScheme scheme);

struct ScnConfig {
  std::size_t l_max = 100;
  std::size_t t_max = 20;     // candidates per scope value
  double epsilon = 0.05;      // stop RMSE; 0 grows to l_max
  std::vector<double> lambda_grid{1.0};
  double r = 0.999;
  ScnScheme scheme = ScnScheme::sc3;
  std::size_t window = 10;    // sc2 only
  std::uint64_t seed = 0;
  /// Full-grid redraws with escalated r after an empty pool; 0 stops at the
  /// first empty pool.
  std::size_t max_r_retries = 8;
  EscalationRule escalation = EscalationRule::interval;

  void validate() const;
};

struct XiScore {
  std::vector<double> per_output;
  double total = 0.0;
  double min() const;
};

/// Supervisory score of a candidate direction against the residual:
/// xi_q = <e_q,h>^2 / <h,h> - (1 - r - mu) <e_q,e_q>.
XiScore sc_xi(std::span<const double> h, const Matrix& residual, double r, double mu);

/// mu_L = (1 - r) / (L + 1) for the node with 1-based index L.
double scn_mu(double r, std::size_t node_index);

struct CandidateRecord {
  HiddenNode node;
  Vector h;
  double xi = 0.0;      // sum over outputs
  double xi_min = 0.0;  // min over outputs
  double lambda = 0.0;
  double r = 0.0;       // in force at acceptance
  double mu = 0.0;
  std::size_t escalations = 0;
};

/// Incrementally built SCN in the raw activation basis.
struct ScnState {
  Matrix targets;                 // N×m
  std::vector<HiddenNode> nodes;
  std::vector<Vector> columns;    // activation vectors h_1..h_L
  Matrix beta;                    // L×m
  Matrix residual;                // T - H·beta

  explicit ScnState(Matrix t);
  std::size_t size() const noexcept { return nodes.size(); }
  Matrix activations() const;
};

/// Draws t_max candidates per scope value in grid order, keeps those with
/// min_q xi_q >= 0 and returns the keeper with the largest xi_total
/// (earliest drawn wins ties). An empty pool escalates r and redraws the grid
/// up to max_r_retries times before ConfigurationFailure is thrown.
CandidateRecord configure_node_scn(const ScnState& state, const Matrix& x, const ScnConfig& config,
                                   Rng& rng);

/// Each update appends the candidate to the state and refreshes beta and the
/// residual; the returned matrix holds the rows that were (re)computed.
Matrix update_weights_sc1(ScnState& state, const CandidateRecord& candidate);
Matrix update_weights_sc2(ScnState& state, const CandidateRecord& candidate, std::size_t window);
Matrix update_weights_sc3(ScnState& state, const CandidateRecord& candidate);

TrainResult train_scn(const Dataset& ds, const ScnConfig& config);

}  // namespace confignet
