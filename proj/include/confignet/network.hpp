#pragma once

#include "confignet/dataset.hpp"
#include "confignet/linalg.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace confignet {

enum class Activation { sigmoid };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

double activate(Activation act, double z) noexcept;

struct HiddenNode {
  Vector w;
  double b = 0.0;
};

/// Activation vector g(w·x_i + b) of one node over the rows of x.
Vector hidden_output(const HiddenNode& node, const Matrix& x, Activation act);

/// N×L matrix whose column j is hidden_output(nodes[j], x).
Matrix hidden_matrix(const std::vector<HiddenNode>& nodes, const Matrix& x, Activation act);

/// Scaling and label information needed to serve a model on raw data.
struct ModelMetadata {
  Task task = Task::regression;
  NormMeta scaling;
  std::vector<std::string> class_labels;
};

/// Deployable single-hidden-layer model. Output weights are expressed in the
/// raw activation basis: prediction is hidden_matrix(nodes, x) · beta.
struct NetworkModel {
  std::vector<HiddenNode> nodes;
  Matrix beta;  // L×m
  Activation activation = Activation::sigmoid;
  std::size_t d = 0;
  std::size_t m = 0;
  std::optional<ModelMetadata> metadata;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Predictions in the space the model was trained in. An empty model
/// predicts zero everywhere.
Matrix predict(const NetworkModel& model, const Matrix& x);

/// Training-time Gram-Schmidt bookkeeping for orthogonal construction.
///
/// Holds the orthogonal columns v_1..v_L, the unit upper triangular
/// coefficients with H = V·R, output weights in the v-basis, and the current
/// residual e_L = T - V·beta_ortho.
class OrthoState {
public:
  explicit OrthoState(Matrix targets);

  std::size_t size() const noexcept { return basis_.size(); }
  std::size_t samples() const noexcept { return residual_.rows(); }
  std::size_t outputs() const noexcept { return residual_.cols(); }

  const std::vector<Vector>& basis() const noexcept { return basis_; }
  const std::vector<double>& basis_sq_norms() const noexcept { return sq_norms_; }
  Matrix basis_matrix() const;
  const Matrix& r() const noexcept { return r_; }
  const Matrix& beta_ortho() const noexcept { return beta_ortho_; }
  const Matrix& residual() const noexcept { return residual_; }

  /// Appends v with its projection coefficients (one per existing column)
  /// and output-weight row, and subtracts v·beta_row from the residual.
  void append(Vector v, std::span<const double> coeffs, std::span<const double> beta_row);

private:
  std::vector<Vector> basis_;
  std::vector<double> sq_norms_;
  Matrix r_;
  Matrix beta_ortho_;
  Matrix residual_;
};

/// Converts v-basis output weights to the raw activation basis by solving
/// R·beta_raw = beta_ortho.
NetworkModel finalize(const OrthoState& ortho, const std::vector<HiddenNode>& nodes,
                      Activation act, std::size_t input_dim);

/// Frobenius ratio ‖H - V·R‖ / ‖H‖ on training inputs, the span-preservation check.
double reconstruction_error(const OrthoState& ortho, const std::vector<HiddenNode>& nodes,
                            const Matrix& x, Activation act);

nlohmann::json model_to_json(const NetworkModel& model);
NetworkModel model_from_json(const nlohmann::json& doc);

void save_model(const NetworkModel& model, const std::filesystem::path& path);
NetworkModel load_model(const std::filesystem::path& path);

}  // namespace confignet
