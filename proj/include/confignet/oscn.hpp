#pragma once

#include "confignet/dataset.hpp"
#include "confignet/learner.hpp"
#include "confignet/scn.hpp"

#include <cstdint>
#include <vector>

namespace confignet {

struct OscnConfig {
  std::size_t l_max = 100;
  std::size_t t_max = 20;
  double epsilon = 0.05;   // stop RMSE; 0 grows to l_max
  double sigma = 1e-6;     // minimum norm of an orthogonalized candidate
  std::vector<double> lambda_grid{1.0};
  std::uint64_t seed = 0;
  std::size_t max_r_retries = 8;
  EscalationRule escalation = EscalationRule::interval;

  void validate() const;
};

/// Contractive parameters in force while configuring node L.
struct AdaptiveParams {
  std::size_t l = 1;
  double r = 0.5;
  double mu = 0.25;
  double tau = 0.75;
};

/// r = L/(L+1), mu = (1-r)/(L+1) = 1/(L+1)^2, tau = r + mu.
AdaptiveParams adaptive_params(std::size_t l);

/// One escalation step: r <- r + tau' (clamped below 1), mu recomputed as
/// (1-r)/(L+1).
AdaptiveParams escalate(const AdaptiveParams& params, Rng& rng, EscalationRule rule);

/// Residual squared-norm ceiling after L nodes under the adaptive schedule:
/// 2/(L+2) * exp(L/(L+1)) * |e_0|^2.
double error_bound(std::size_t l, double e0_sq);

struct Orthogonalized {
  Vector v;
  std::vector<double> coeffs;  // <v_j,h>/<v_j,v_j> per stored column, second pass included
  bool reorthogonalized = false;
};

/// Relative orthogonality above which a second Gram-Schmidt pass is applied
/// to the new vector.
inline constexpr double kReorthogonalizeAbove = 1e-12;

/// Classical Gram-Schmidt of h against stored pairwise-orthogonal columns.
/// `sq_norms` caches <v_j,v_j>; a zero entry is an internal-consistency error.
Orthogonalized orthogonalize(std::span<const double> h, std::span<const Vector> basis,
                             std::span<const double> sq_norms);

/// Same, with the basis given as the columns of an N×L matrix.
Orthogonalized orthogonalize(std::span<const double> h, const Matrix& basis);

/// xi_q = <e_q,v>^2/<v,v> - (1 - r - mu)<e_q,e_q>; a candidate passes when
/// every xi_q is non-negative.
XiScore xi_score(std::span<const double> v, const Matrix& residual, const AdaptiveParams& params);

/// beta_q = <e_q,v>/<v,v>.
std::vector<double> beta_update(const Matrix& residual, std::span<const double> v);

struct OscnCandidate {
  HiddenNode node;
  Orthogonalized ortho;
  XiScore xi;
  double lambda = 0.0;
  AdaptiveParams params;        // in force at acceptance
  std::size_t escalations = 0;  // r escalations needed for this node
};

/// Draws t_max candidates per scope value, drops those whose orthogonal
/// component is shorter than sigma, and returns the passing candidate with
/// the largest xi_total. When the whole grid yields nothing, r is escalated
/// and the grid is redrawn, up to max_r_retries times.
OscnCandidate configure_node_oscn(const OrthoState& state, const Matrix& x,
                                  const OscnConfig& config, Rng& rng);

struct OscnResult {
  NetworkModel model;
  TrialReport report;
  OrthoState state;
};

OscnResult train_oscn(const Dataset& ds, const OscnConfig& config);

}  // namespace confignet
