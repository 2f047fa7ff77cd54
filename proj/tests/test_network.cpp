#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confignet/network.hpp"
#include "confignet/oscn.hpp"

#include <cmath>
#include <filesystem>

using namespace confignet;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.uniform(0.0, 1.0);
  return m;
}

/// Builds an orthogonal state from random nodes, bypassing the supervisory test.
struct Built {
  OrthoState state;
  std::vector<HiddenNode> nodes;
};

Built build(Rng& rng, const Matrix& x, const Matrix& t, std::size_t l) {
  Built b{OrthoState(t), {}};
  for (std::size_t k = 0; k < l; ++k) {
    HiddenNode node = draw_node(rng, x.cols(), 3.0);
    const Vector h = hidden_output(node, x, Activation::sigmoid);
    const auto o = orthogonalize(h, b.state.basis(), b.state.basis_sq_norms());
    const auto beta = beta_update(b.state.residual(), o.v);
    b.state.append(o.v, o.coeffs, beta);
    b.nodes.push_back(std::move(node));
  }
  return b;
}

}  // namespace

TEST_CASE("sigmoid activation") {
  CHECK(activate(Activation::sigmoid, 0.0) == 0.5);
  CHECK(activate(Activation::sigmoid, 1.0) == doctest::Approx(0.731059).epsilon(1e-6));
  CHECK(activation_from_string(to_string(Activation::sigmoid)) == Activation::sigmoid);
}

TEST_CASE("hidden_output examples") {
  Rng rng(1);
  const Matrix x = random_matrix(rng, 6, 3);
  for (double v : hidden_output({{0, 0, 0}, 0.0}, x, Activation::sigmoid)) CHECK(v == 0.5);

  const Vector h = hidden_output({{1.0}, 0.0}, Matrix{{0}, {1}}, Activation::sigmoid);
  CHECK(h[0] == 0.5);
  CHECK(h[1] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
  CHECK(h[1] == doctest::Approx(0.731059).epsilon(1e-6));

  for (int k = 0; k < 20; ++k) {
    const HiddenNode node = draw_node(rng, 3, 5.0);
    for (double v : hidden_output(node, x, Activation::sigmoid)) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
  CHECK_THROWS_AS(hidden_output({{1.0, 2.0}, 0.0}, x, Activation::sigmoid), InvalidInput);
}

TEST_CASE("predict on empty and zero-weight models") {
  Rng rng(2);
  const Matrix x = random_matrix(rng, 4, 2);
  NetworkModel empty;
  empty.d = 2;
  empty.m = 3;
  empty.beta = Matrix(0, 3);
  CHECK(predict(empty, x) == Matrix(4, 3));

  NetworkModel one = empty;
  one.nodes.push_back({{0.3, -0.2}, 0.1});
  one.beta = Matrix(1, 3);
  CHECK(predict(one, x) == Matrix(4, 3));
  CHECK_THROWS_AS(predict(one, Matrix(4, 5)), InvalidInput);
}

TEST_CASE("finalize with a single node keeps the weights") {
  Rng rng(3);
  const Matrix x = random_matrix(rng, 10, 2);
  const Matrix t = random_matrix(rng, 10, 2);
  const Built b = build(rng, x, t, 1);
  CHECK(b.state.r() == Matrix{{1}});
  const NetworkModel model = finalize(b.state, b.nodes, Activation::sigmoid, 2);
  CHECK(model.beta == b.state.beta_ortho());
}

TEST_CASE("finalize with an already orthogonal basis has R = I") {
  // Columns e1 and e2 stored directly: the coefficients vanish.
  OrthoState state(Matrix{{1}, {2}});
  state.append({1, 0}, {}, std::vector<double>{1});
  state.append({0, 1}, std::vector<double>{0}, std::vector<double>{2});
  CHECK(state.r() == Matrix::identity(2));
  CHECK(state.residual() == Matrix{{0}, {0}});
}

TEST_CASE("finalize matches the orthogonal-basis fit") {
  Rng rng(4);
  const Matrix x = random_matrix(rng, 50, 3);
  const Matrix t = random_matrix(rng, 50, 2);
  const Built b = build(rng, x, t, 5);
  const NetworkModel model = finalize(b.state, b.nodes, Activation::sigmoid, 3);
  const Matrix fitted = matmul(b.state.basis_matrix(), b.state.beta_ortho());
  const Matrix pred = predict(model, x);
  double worst = 0.0;
  for (std::size_t k = 0; k < pred.data().size(); ++k)
    worst = std::max(worst, std::abs(pred.data()[k] - fitted.data()[k]));
  CHECK(worst <= 1e-8);
  CHECK(frob_norm(subtract(pred, fitted)) <= 1e-8 * frob_norm(fitted));
  CHECK(reconstruction_error(b.state, b.nodes, x, Activation::sigmoid) <= 1e-9);
}

TEST_CASE("finalize rejects inconsistent state") {
  Rng rng(5);
  const Matrix x = random_matrix(rng, 8, 2);
  const Built b = build(rng, x, random_matrix(rng, 8, 1), 3);
  std::vector<HiddenNode> fewer(b.nodes.begin(), b.nodes.end() - 1);
  CHECK_THROWS_AS(finalize(b.state, fewer, Activation::sigmoid, 2), ConsistencyError);
}

TEST_CASE("OrthoState residual tracks T - V beta") {
  Rng rng(6);
  const Matrix x = random_matrix(rng, 30, 2);
  const Matrix t = random_matrix(rng, 30, 3);
  const Built b = build(rng, x, t, 6);
  const Matrix expect = subtract(t, matmul(b.state.basis_matrix(), b.state.beta_ortho()));
  CHECK(frob_norm(subtract(expect, b.state.residual())) <= 1e-12 * frob_norm(t));
}

TEST_CASE("model JSON round trip preserves predictions") {
  Rng rng(7);
  const Matrix x = random_matrix(rng, 40, 3);
  const Built b = build(rng, x, random_matrix(rng, 40, 2), 7);
  NetworkModel model = finalize(b.state, b.nodes, Activation::sigmoid, 3);
  model.metadata = ModelMetadata{Task::regression, NormMeta{{{0, 0, 0}, {1, 1, 1}}, ColumnRange{{0, 0}, {2, 2}}}, {}};

  const auto path = std::filesystem::temp_directory_path() / "confignet_model.json";
  save_model(model, path);
  const NetworkModel back = load_model(path);
  const Matrix a = predict(model, x), c = predict(back, x);
  for (std::size_t k = 0; k < a.data().size(); ++k)
    CHECK(std::abs(a.data()[k] - c.data()[k]) <= 1e-12 * std::max(1.0, std::abs(a.data()[k])));
  REQUIRE(back.metadata.has_value());
  CHECK(back.metadata->scaling.targets->max == std::vector<double>{2, 2});

  const auto j = model_to_json(model);
  CHECK(j.contains("d"));
  CHECK(j.contains("nodes"));
  CHECK(j.contains("beta"));
  auto broken = j;
  broken["beta"].erase(0);
  CHECK_THROWS(model_from_json(broken));
}
