#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confignet/oscn.hpp"

#include <cmath>

using namespace confignet;

namespace {

Dataset eq26(std::size_t n, std::uint64_t seed) { return minmax_normalize(gen_scalar_function(n, seed)); }

OscnConfig table1_config(std::uint64_t seed) {
  OscnConfig cfg;
  cfg.lambda_grid = {150, 160, 170, 180, 190, 200};
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("adaptive_params examples") {
  const auto p1 = adaptive_params(1);
  CHECK(p1.r == 0.5);
  CHECK(p1.mu == 0.25);
  CHECK(p1.tau == 0.75);
  const auto p9 = adaptive_params(9);
  CHECK(p9.r == doctest::Approx(0.9));
  CHECK(p9.mu == doctest::Approx(0.01));
  CHECK(p9.tau == doctest::Approx(0.91));
  CHECK_THROWS_AS(adaptive_params(0), InvalidInput);
}

TEST_CASE("tau is increasing and below one") {
  double prev = adaptive_params(1).tau;
  for (std::size_t l = 2; l <= 1000000; ++l) {
    const auto p = adaptive_params(l);
    if (!(p.tau > prev && p.tau < 1.0)) {
      FAIL("tau sequence broke at L=" << l);
      break;
    }
    prev = p.tau;
  }
  CHECK(prev < 1.0);
}

TEST_CASE("escalation keeps r below one and recomputes mu") {
  Rng rng(3);
  for (auto rule : {EscalationRule::interval, EscalationRule::two_point}) {
    AdaptiveParams p = adaptive_params(4);
    for (int k = 0; k < 200; ++k) {
      const auto next = escalate(p, rng, rule);
      const double gap = 1.0 - p.r;
      const double step = next.r - p.r;
      CHECK(next.r <= kMaxEscalatedR);
      if (next.r < kMaxEscalatedR) {
        CHECK(step >= 0.5 * gap * (1 - 1e-12));
        CHECK(step <= gap);
      }
      CHECK(next.mu == doctest::Approx((1.0 - next.r) / 5.0));
      CHECK(next.tau == doctest::Approx(next.r + next.mu));
      CHECK(next.tau < 1.0);
      p = next;
    }
  }
}

TEST_CASE("orthogonalize examples") {
  const auto first = orthogonalize(Vector{3, 4}, std::span<const Vector>{}, std::span<const double>{});
  CHECK(first.v == Vector{3, 4});
  CHECK(first.coeffs.empty());

  const std::vector<Vector> basis{{1, 0}};
  const std::vector<double> sq{1.0};
  const auto axis = orthogonalize(Vector{1, 1}, basis, sq);
  CHECK(axis.v[0] == doctest::Approx(0.0));
  CHECK(axis.v[1] == doctest::Approx(1.0));
  REQUIRE(axis.coeffs.size() == 1);
  CHECK(axis.coeffs[0] == doctest::Approx(1.0));

  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(orthogonalize(Vector{1, 1}, std::vector<Vector>{{0, 0}}, bad), ConsistencyError);
}

TEST_CASE("a vector inside the span orthogonalizes to nothing") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> basis;
    std::vector<double> sq;
    for (int j = 0; j < 4; ++j) {
      Vector h(30);
      for (auto& x : h) x = rng.uniform(0, 1);
      const auto o = orthogonalize(h, basis, sq);
      sq.push_back(inner(o.v, o.v));
      basis.push_back(o.v);
    }
    Vector h(30, 0.0);
    for (const auto& b : basis) {
      const double c = rng.uniform(-2, 2);
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += c * b[i];
    }
    CHECK(norm(orthogonalize(h, basis, sq).v) <= 1e-10 * norm(h));
  }
}

TEST_CASE("orthogonalize matrix overload agrees") {
  Rng rng(6);
  Matrix v(10, 2);
  v.set_col(0, Vector{1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  v.set_col(1, Vector{0, 2, 0, 0, 0, 0, 0, 0, 0, 0});
  Vector h(10);
  for (auto& x : h) x = rng.uniform(0, 1);
  const auto a = orthogonalize(h, v);
  CHECK(a.v[0] == doctest::Approx(0.0));
  CHECK(a.v[1] == doctest::Approx(0.0));
  CHECK(a.coeffs[1] == doctest::Approx(h[1] / 2.0));
}

TEST_CASE("xi_score examples") {
  const Matrix e{{1}, {2}};
  const auto p = adaptive_params(3);
  CHECK(xi_score(Vector{1, 2}, e, p).total == doctest::Approx(p.tau * 5.0));
  CHECK(xi_score(Vector{2, -1}, e, p).total == doctest::Approx(-(1 - p.tau) * 5.0));
  CHECK(xi_score(Vector{1, 0}, Matrix{{1}, {1}}, adaptive_params(1)).total == doctest::Approx(0.5));
  CHECK_THROWS_AS(xi_score(Vector{0, 0}, e, p), InvalidInput);
}

TEST_CASE("beta_update examples") {
  CHECK(beta_update(Matrix{{2}, {0}}, Vector{1, 0}) == std::vector<double>{2.0});
  CHECK(beta_update(Matrix{{0}, {3}}, Vector{1, 0}) == std::vector<double>{0.0});
  CHECK_THROWS_AS(beta_update(Matrix{{1}, {1}}, Vector{0, 0}), InvalidInput);

  Rng rng(7);
  Matrix e(20, 3);
  for (auto& x : e.data()) x = rng.uniform(-1, 1);
  Vector v(20);
  for (auto& x : v) x = rng.uniform(-1, 1);
  const auto beta = beta_update(e, v);
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t q = 0; q < 3; ++q) e(i, q) -= v[i] * beta[q];
  for (double ev : column_inner(e, v)) CHECK(std::abs(ev) <= 1e-10);
}

TEST_CASE("error_bound examples") {
  CHECK(error_bound(1, 1.0) == doctest::Approx(2.0 / 3.0 * std::exp(0.5)));
  CHECK(error_bound(1, 1.0) == doctest::Approx(1.0991).epsilon(1e-4));
  CHECK(error_bound(8, 1.0) == doctest::Approx(0.2 * std::exp(8.0 / 9.0)));
  CHECK(error_bound(8, 1.0) == doctest::Approx(0.4865).epsilon(1e-4));
  CHECK(error_bound(1000000, 1.0) < 1e-5);
  CHECK_THROWS_AS(error_bound(0, 1.0), InvalidInput);
}

TEST_CASE("first node is not orthogonalized and duplicates are filtered") {
  const Dataset ds = eq26(200, 2);
  OrthoState state(ds.t);
  OscnConfig cfg = table1_config(1);
  Rng rng(cfg.seed);
  const auto c1 = configure_node_oscn(state, ds.x, cfg, rng);
  CHECK(c1.ortho.coeffs.empty());
  CHECK(c1.ortho.v == hidden_output(c1.node, ds.x, Activation::sigmoid));
  state.append(c1.ortho.v, c1.ortho.coeffs, beta_update(state.residual(), c1.ortho.v));

  // Re-offering the stored node: its orthogonal part falls below sigma.
  const auto dup = orthogonalize(hidden_output(c1.node, ds.x, Activation::sigmoid), state.basis(),
                                 state.basis_sq_norms());
  CHECK(norm(dup.v) < cfg.sigma);
}

TEST_CASE("train_oscn on a zero target returns an empty model") {
  Dataset ds = eq26(40, 1);
  ds.t = Matrix(40, 2);
  const auto r = train_oscn(ds, table1_config(0));
  CHECK(r.model.size() == 0);
  CHECK(r.report.nodes_used == 0);
  CHECK(r.report.residual_history.empty());
}

TEST_CASE("train_oscn invariants on the scalar function") {
  const Dataset ds = eq26(800, 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = train_oscn(ds, table1_config(seed));
    const auto& rep = r.report;
    REQUIRE(rep.ortho.has_value());
    const auto& o = *rep.ortho;
    CHECK_FALSE(rep.failed);
    CHECK(o.max_basis_orthogonality <= 1e-9);
    CHECK(o.max_residual_orthogonality <= 1e-8);
    CHECK(o.contraction_violations == 0);
    CHECK(o.least_squares_gap <= 1e-8);
    CHECK(o.finalize_error <= 1e-8);
    CHECK(o.reconstruction_error <= 1e-9);
    CHECK(o.min_basis_norm >= table1_config(seed).sigma);
    if (rep.escalation_events == 0) CHECK(o.bound_violations == 0);
    for (std::size_t i = 1; i < rep.residual_history.size(); ++i)
      CHECK(rep.residual_history[i] <= rep.residual_history[i - 1]);
    CHECK(rep.tau_trace.size() == rep.nodes_used);
    for (double tau : rep.tau_trace) CHECK(tau < 1.0);
    CHECK(rep.train_rmse <= 0.05);

    // Independent recomputation of the contraction from the history.
    const double n = static_cast<double>(ds.size());
    double prev_sq = std::pow(frob_norm(ds.t), 2);
    for (std::size_t l = 0; l < rep.nodes_used; ++l) {
      const double sq = rep.residual_history[l] * rep.residual_history[l] * n;
      CHECK(sq <= rep.tau_trace[l] * prev_sq * (1 + 1e-9));
      prev_sq = sq;
    }
  }
}

TEST_CASE("train_oscn is deterministic and multi-output safe") {
  const Dataset ds = minmax_normalize(gen_multi_output(300, 4));
  OscnConfig cfg;
  cfg.lambda_grid = {10, 15, 20, 25, 30, 35, 40, 45, 50};
  cfg.t_max = 10;
  cfg.sigma = 1e-8;
  cfg.epsilon = 0.0;
  cfg.l_max = 8;
  cfg.seed = 12;
  const auto a = train_oscn(ds, cfg);
  const auto b = train_oscn(ds, cfg);
  CHECK(a.model.beta == b.model.beta);
  CHECK(a.report.residual_history == b.report.residual_history);
  CHECK(a.report.nodes_used == 8);
  CHECK(a.model.m == 2);
}

TEST_CASE("an impossible sigma fails configuration") {
  const Dataset ds = eq26(100, 3);
  OscnConfig cfg = table1_config(1);
  cfg.sigma = 1e6;
  cfg.max_r_retries = 2;
  const auto r = train_oscn(ds, cfg);
  CHECK(r.report.failed);
  CHECK(r.model.size() == 0);
}

TEST_CASE("config validation") {
  OscnConfig cfg;
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.lambda_grid = {-1.0};
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}
