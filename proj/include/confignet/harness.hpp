#pragma once

#include "confignet/dataset.hpp"
#include "confignet/irvfln.hpp"
#include "confignet/learner.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace confignet {

enum class Algorithm { irvfln, sc1, sc2, sc3, oscn };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

/// Union of the learner settings; fields a given algorithm does not use are
/// ignored. IRVFLN takes its single scope from lambda_grid.
struct LearnerConfig {
  Algorithm algorithm = Algorithm::oscn;
  std::size_t l_max = 100;
  std::size_t t_max = 20;
  double epsilon = 0.05;
  double sigma = 1e-6;
  std::vector<double> lambda_grid{1.0};
  double r = 0.999;
  std::size_t window = 10;
  std::size_t max_r_retries = 8;
  EscalationRule escalation = EscalationRule::interval;
  IrvflnUpdate irvfln_update = IrvflnUpdate::constructive;
};

TrainResult train_learner(const Dataset& train, const LearnerConfig& config, std::uint64_t seed);

double rmse(const Matrix& pred, const Matrix& target);
std::vector<double> rmse_per_output(const Matrix& pred, const Matrix& target);

/// Fraction of rows whose argmax matches; ties go to the lowest column.
double accuracy(const Matrix& pred, const Matrix& target_onehot);

/// Parses "a:s:b" (inclusive), "{a:s:b}", "{v}", "v" or "v1,v2,...".
std::vector<double> parse_scope(const std::string& text);

struct Stat {
  double ave = 0.0;
  double dev = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

Stat summarize(std::span<const double> values);

struct TrialOptions {
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::size_t threads = 1;
  bool keep_models = false;
  /// Grow exactly this many nodes, ignoring epsilon.
  std::optional<std::size_t> fixed_nodes;
};

struct SuiteResult {
  std::string label;
  LearnerConfig config;
  Task task = Task::regression;
  std::size_t trials = 0;
  std::uint64_t base_seed = 0;
  std::optional<std::size_t> fixed_nodes;
  std::vector<TrialReport> reports;  // ordered by trial index
  std::size_t failed_trials = 0;
  Stat nodes;
  Stat train_rmse;
  Stat test_rmse;
  std::vector<Stat> train_rmse_per_output;
  std::vector<Stat> test_rmse_per_output;
  std::optional<Stat> train_accuracy;
  std::optional<Stat> test_accuracy;
  /// Variance across successful trials of every test prediction (N_test×m).
  Matrix prediction_variance;
  std::vector<NetworkModel> models;  // filled when keep_models is set
};

/// Trial t trains with seed base_seed + t on the same prepared data. Trials
/// that end with a hard failure stay in `reports` but are left out of the
/// statistics. Parallel execution yields the same result as sequential.
SuiteResult run_trials(const PreparedData& data, const LearnerConfig& config,
                       const TrialOptions& options, std::string label = {});

/// Trains until exactly node_count nodes are accepted. A shorter model is
/// flagged.
TrainResult run_fixed_nodes(const PreparedData& data, LearnerConfig config, std::size_t node_count,
                            std::uint64_t seed);

/// Fills the test metrics of `report` and attaches scaling metadata to the model.
void evaluate(TrainResult& result, const PreparedData& data);

nlohmann::json to_json(const LearnerConfig& config);
nlohmann::json to_json(const Stat& stat);
nlohmann::json to_json(const TrialReport& report);

/// Wall-clock times are left out so equal runs serialize identically.
nlohmann::json suite_to_json(const SuiteResult& suite);

/// One row per trial: label, trial, seed, then the RMSE after each node.
void write_residual_csv(const std::vector<SuiteResult>& suites, const std::filesystem::path& path);
void write_timing_csv(const std::vector<SuiteResult>& suites, const std::filesystem::path& path);
void write_variance_csv(const SuiteResult& suite, const Matrix& test_x,
                        const std::filesystem::path& path);

/// True when any trial failed or carries an invariant flag.
bool has_failures(const SuiteResult& suite);

}  // namespace confignet
