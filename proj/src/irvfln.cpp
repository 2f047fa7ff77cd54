#include "confignet/irvfln.hpp"

#include <algorithm>
#include <chrono>

namespace confignet {

std::string to_string(IrvflnUpdate update) {
  return update == IrvflnUpdate::constructive ? "constructive" : "global";
}

IrvflnUpdate irvfln_update_from_string(const std::string& name) {
  if (name == "constructive") return IrvflnUpdate::constructive;
  if (name == "global") return IrvflnUpdate::global;
  throw InvalidInput("unknown irvfln update '" + name + "'");
}

void IrvflnConfig::validate() const {
  if (!(lambda > 0.0)) throw InvalidInput("irvfln: lambda must be positive");
  if (!(epsilon >= 0.0)) throw InvalidInput("irvfln: epsilon must be non-negative");
}

TrainResult train_irvfln(const Dataset& ds, const IrvflnConfig& config) {
  config.validate();
  validate_training_data(ds.x, ds.t);
  const auto start = std::chrono::steady_clock::now();

  Rng rng(config.seed);
  TrialReport report;
  report.algorithm = "irvfln";
  report.seed = config.seed;

  TrainResult result;
  result.model.d = ds.inputs();
  result.model.m = ds.outputs();
  result.model.beta = Matrix(0, ds.outputs());
  Matrix h;
  Matrix residual = ds.t;

  while (result.model.size() < config.l_max && residual_rmse(residual) > config.epsilon) {
    HiddenNode node = draw_node(rng, ds.inputs(), config.lambda);
    Vector col = hidden_output(node, ds.x, Activation::sigmoid);
    result.model.nodes.push_back(std::move(node));
    if (config.update == IrvflnUpdate::global) {
      h.append_col(col);
      result.model.beta = lstsq_pinv(h, ds.t);
      residual = subtract(ds.t, matmul(h, result.model.beta));
    } else {
      const double hh = inner(col, col);
      auto row = column_inner(residual, col);
      for (auto& b : row) b = hh > 0.0 ? b / hh : 0.0;
      Matrix grown(result.model.beta.rows() + 1, ds.outputs());
      std::copy(result.model.beta.data().begin(), result.model.beta.data().end(),
                grown.data().begin());
      for (std::size_t q = 0; q < row.size(); ++q) grown(grown.rows() - 1, q) = row[q];
      result.model.beta = std::move(grown);
      for (std::size_t i = 0; i < residual.rows(); ++i) {
        auto e = residual.row(i);
        for (std::size_t q = 0; q < e.size(); ++q) e[q] -= col[i] * row[q];
      }
    }
    report.residual_history.push_back(residual_rmse(residual));
    report.accepted_lambda.push_back(config.lambda);
  }

  report.nodes_used = result.model.size();
  report.train_rmse = residual_rmse(residual);
  report.train_rmse_per_output = residual_rmse_per_output(residual);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = std::move(report);
  return result;
}

}  // namespace confignet
