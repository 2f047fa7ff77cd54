#include "confignet/network.hpp"

#include <cmath>
#include <fstream>

namespace confignet {

using nlohmann::json;

std::string to_string(Activation) { return "sigmoid"; }

Activation activation_from_string(const std::string& name) {
  if (name == "sigmoid") return Activation::sigmoid;
  throw InvalidInput("unknown activation '" + name + "'");
}

double activate(Activation, double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

Vector hidden_output(const HiddenNode& node, const Matrix& x, Activation act) {
  if (node.w.size() != x.cols()) {
    throw InvalidInput("hidden_output: node has " + std::to_string(node.w.size()) +
                       " weights but inputs have " + std::to_string(x.cols()) + " columns");
  }
  Vector h(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double z = node.b;
    for (std::size_t k = 0; k < row.size(); ++k) z += node.w[k] * row[k];
    h[i] = activate(act, z);
  }
  return h;
}

Matrix hidden_matrix(const std::vector<HiddenNode>& nodes, const Matrix& x, Activation act) {
  Matrix h(x.rows(), nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) h.set_col(j, hidden_output(nodes[j], x, act));
  return h;
}

Matrix predict(const NetworkModel& model, const Matrix& x) {
  if (x.cols() != model.d) {
    throw InvalidInput("predict: model expects " + std::to_string(model.d) +
                       " inputs, got " + std::to_string(x.cols()));
  }
  if (model.nodes.empty()) return Matrix(x.rows(), model.m);
  return matmul(hidden_matrix(model.nodes, x, model.activation), model.beta);
}

OrthoState::OrthoState(Matrix targets)
    : beta_ortho_(0, targets.cols()), residual_(std::move(targets)) {}

Matrix OrthoState::basis_matrix() const { return from_columns(basis_, samples()); }

void OrthoState::append(Vector v, std::span<const double> coeffs,
                        std::span<const double> beta_row) {
  const std::size_t l = basis_.size();
  if (v.size() != samples()) throw InvalidInput("OrthoState: basis vector length mismatch");
  if (coeffs.size() != l) throw InvalidInput("OrthoState: need one coefficient per column");
  if (beta_row.size() != outputs()) throw InvalidInput("OrthoState: beta row width mismatch");

  Matrix grown(l + 1, l + 1);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) grown(i, j) = r_(i, j);
    grown(i, l) = coeffs[i];
  }
  grown(l, l) = 1.0;
  r_ = std::move(grown);

  std::vector<double> rows(beta_ortho_.data().begin(), beta_ortho_.data().end());
  rows.insert(rows.end(), beta_row.begin(), beta_row.end());
  beta_ortho_ = Matrix(l + 1, outputs(), std::move(rows));

  for (std::size_t i = 0; i < samples(); ++i) {
    auto e = residual_.row(i);
    for (std::size_t q = 0; q < outputs(); ++q) e[q] -= v[i] * beta_row[q];
  }
  sq_norms_.push_back(inner(v, v));
  basis_.push_back(std::move(v));
}

NetworkModel finalize(const OrthoState& ortho, const std::vector<HiddenNode>& nodes,
                      Activation act, std::size_t input_dim) {
  const std::size_t l = ortho.size();
  if (nodes.size() != l || ortho.r().rows() != l || ortho.beta_ortho().rows() != l) {
    throw ConsistencyError("finalize: " + std::to_string(nodes.size()) + " nodes for a basis of " +
                           std::to_string(l) + " columns");
  }
  for (const auto& node : nodes) {
    if (node.w.size() != input_dim) throw ConsistencyError("finalize: node input width mismatch");
  }
  NetworkModel model;
  model.nodes = nodes;
  model.activation = act;
  model.d = input_dim;
  model.m = ortho.outputs();
  try {
    model.beta = l == 0 ? Matrix(0, model.m) : solve_unit_upper(ortho.r(), ortho.beta_ortho());
  } catch (const InvalidInput& e) {
    throw ConsistencyError(std::string("finalize: ") + e.what());
  }
  return model;
}

double reconstruction_error(const OrthoState& ortho, const std::vector<HiddenNode>& nodes,
                            const Matrix& x, Activation act) {
  if (ortho.size() == 0) return 0.0;
  const Matrix h = hidden_matrix(nodes, x, act);
  const double scale = frob_norm(h);
  const double err = frob_norm(subtract(h, matmul(ortho.basis_matrix(), ortho.r())));
  return scale > 0.0 ? err / scale : err;
}

namespace {

json range_to_json(const ColumnRange& r) { return json{{"min", r.min}, {"max", r.max}}; }

ColumnRange range_from_json(const json& j) {
  return {j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>()};
}

}  // namespace

json model_to_json(const NetworkModel& model) {
  json nodes = json::array();
  for (const auto& n : model.nodes) nodes.push_back(json{{"w", n.w}, {"b", n.b}});
  json beta = json::array();
  for (std::size_t i = 0; i < model.beta.rows(); ++i) {
    const auto row = model.beta.row(i);
    beta.push_back(std::vector<double>(row.begin(), row.end()));
  }
  json doc{{"d", model.d},
           {"m", model.m},
           {"activation", to_string(model.activation)},
           {"nodes", std::move(nodes)},
           {"beta", std::move(beta)}};
  if (model.metadata) {
    const auto& meta = *model.metadata;
    json scaling{{"features", range_to_json(meta.scaling.features)}};
    if (meta.scaling.targets) scaling["targets"] = range_to_json(*meta.scaling.targets);
    doc["task"] = to_string(meta.task);
    doc["scaling"] = std::move(scaling);
    if (!meta.class_labels.empty()) doc["class_labels"] = meta.class_labels;
  }
  return doc;
}

NetworkModel model_from_json(const json& doc) {
  NetworkModel model;
  model.d = doc.at("d").get<std::size_t>();
  model.m = doc.at("m").get<std::size_t>();
  model.activation = activation_from_string(doc.at("activation").get<std::string>());
  for (const auto& n : doc.at("nodes")) {
    HiddenNode node{n.at("w").get<Vector>(), n.at("b").get<double>()};
    if (node.w.size() != model.d) throw InvalidInput("model: node weight length differs from d");
    model.nodes.push_back(std::move(node));
  }
  const auto& beta = doc.at("beta");
  if (beta.size() != model.nodes.size()) throw InvalidInput("model: beta rows differ from node count");
  std::vector<double> entries;
  for (const auto& row : beta) {
    auto values = row.get<std::vector<double>>();
    if (values.size() != model.m) throw InvalidInput("model: beta row width differs from m");
    entries.insert(entries.end(), values.begin(), values.end());
  }
  model.beta = Matrix(model.nodes.size(), model.m, std::move(entries));
  require_finite(model.beta, "model beta");
  if (doc.contains("scaling")) {
    ModelMetadata meta;
    meta.task = task_from_string(doc.value("task", std::string("regression")));
    const auto& s = doc.at("scaling");
    meta.scaling.features = range_from_json(s.at("features"));
    if (s.contains("targets")) meta.scaling.targets = range_from_json(s.at("targets"));
    if (doc.contains("class_labels")) {
      meta.class_labels = doc.at("class_labels").get<std::vector<std::string>>();
    }
    model.metadata = std::move(meta);
  }
  return model;
}

void save_model(const NetworkModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

NetworkModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return model_from_json(json::parse(in));
}

}  // namespace confignet
