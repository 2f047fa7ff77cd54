#include "confignet/harness.hpp"

#include "confignet/oscn.hpp"
#include "confignet/scn.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

namespace confignet {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput(std::string(what) + ": shape mismatch");
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t q = 1; q < row.size(); ++q)
    if (row[q] > row[best]) best = q;
  return best;
}

double parse_number(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw InvalidInput("scope: '" + std::string(text) + "' is not a number");
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::irvfln: return "irvfln";
    case Algorithm::sc1: return "sc1";
    case Algorithm::sc2: return "sc2";
    case Algorithm::sc3: return "sc3";
    case Algorithm::oscn: return "oscn";
  }
  return "oscn";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::irvfln, Algorithm::sc1, Algorithm::sc2, Algorithm::sc3, Algorithm::oscn})
    if (to_string(a) == name) return a;
  throw InvalidInput("unknown algorithm '" + name + "'");
}

TrainResult train_learner(const Dataset& train, const LearnerConfig& config, std::uint64_t seed) {
  switch (config.algorithm) {
    case Algorithm::irvfln: {
      if (config.lambda_grid.size() != 1)
        throw InvalidInput("irvfln: lambda_grid must hold a single scope");
      IrvflnConfig c;
      c.l_max = config.l_max;
      c.epsilon = config.epsilon;
      c.lambda = config.lambda_grid.front();
      c.seed = seed;
      c.update = config.irvfln_update;
      return train_irvfln(train, c);
    }
    case Algorithm::sc1:
    case Algorithm::sc2:
    case Algorithm::sc3: {
      ScnConfig c;
      c.l_max = config.l_max;
      c.t_max = config.t_max;
      c.epsilon = config.epsilon;
      c.lambda_grid = config.lambda_grid;
      c.r = config.r;
      c.window = config.window;
      c.seed = seed;
      c.max_r_retries = config.max_r_retries;
      c.escalation = config.escalation;
      c.scheme = config.algorithm == Algorithm::sc1   ? ScnScheme::sc1
                 : config.algorithm == Algorithm::sc2 ? ScnScheme::sc2
                                                      : ScnScheme::sc3;
      return train_scn(train, c);
    }
    case Algorithm::oscn: {
      OscnConfig c;
      c.l_max = config.l_max;
      c.t_max = config.t_max;
      c.epsilon = config.epsilon;
      c.sigma = config.sigma;
      c.lambda_grid = config.lambda_grid;
      c.seed = seed;
      c.max_r_retries = config.max_r_retries;
      c.escalation = config.escalation;
      auto r = train_oscn(train, c);
      return {std::move(r.model), std::move(r.report)};
    }
  }
  throw InvalidInput("unknown algorithm");
}

double rmse(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "rmse");
  return residual_rmse(subtract(pred, target));
}

std::vector<double> rmse_per_output(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "rmse");
  return residual_rmse_per_output(subtract(pred, target));
}

double accuracy(const Matrix& pred, const Matrix& target_onehot) {
  require_same_shape(pred, target_onehot, "accuracy");
  if (pred.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.rows(); ++i)
    if (argmax_row(pred.row(i)) == argmax_row(target_onehot.row(i))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.rows());
}

std::vector<double> parse_scope(const std::string& text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && (s.front() == '{' || s.front() == '[')) {
    if (s.size() < 2 || (s.back() != '}' && s.back() != ']'))
      throw InvalidInput("scope: unbalanced brackets in '" + text + "'");
    s = s.substr(1, s.size() - 2);
  }
  if (s.empty()) throw InvalidInput("scope: empty");

  std::vector<double> out;
  if (s.find(':') != std::string_view::npos) {
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 + 1);
    if (c2 == std::string_view::npos || s.find(':', c2 + 1) != std::string_view::npos)
      throw InvalidInput("scope: expected a:s:b, got '" + text + "'");
    const double a = parse_number(s.substr(0, c1));
    const double step = parse_number(s.substr(c1 + 1, c2 - c1 - 1));
    const double b = parse_number(s.substr(c2 + 1));
    if (!(step > 0.0)) throw InvalidInput("scope: step must be positive");
    if (b < a) throw InvalidInput("scope: end lies below start");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) out.push_back(a + static_cast<double>(k) * step);
  } else {
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = std::min(s.find(',', pos), s.size());
      out.push_back(parse_number(s.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  return out;
}

Stat summarize(std::span<const double> values) {
  Stat s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.ave = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.ave) * (v - s.ave);
  s.dev = std::sqrt(sq / static_cast<double>(values.size()));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  // Guard the mean against rounding outside the sample range.
  s.ave = std::clamp(s.ave, s.min, s.max);
  return s;
}

void evaluate(TrainResult& result, const PreparedData& data) {
  auto& report = result.report;
  const Matrix test_pred = predict(result.model, data.test.x);
  report.test_rmse = rmse(test_pred, data.test.t);
  report.test_rmse_per_output = rmse_per_output(test_pred, data.test.t);
  if (data.train.task == Task::classification) {
    report.train_accuracy = accuracy(predict(result.model, data.train.x), data.train.t);
    report.test_accuracy = accuracy(test_pred, data.test.t);
  }
  result.model.metadata = ModelMetadata{data.train.task, data.scaling, data.train.class_labels};
}

TrainResult run_fixed_nodes(const PreparedData& data, LearnerConfig config, std::size_t node_count,
                            std::uint64_t seed) {
  if (node_count == 0) throw InvalidInput("fixed node count must be at least 1");
  config.epsilon = 0.0;
  config.l_max = node_count;
  TrainResult result = train_learner(data.train, config, seed);
  if (result.report.nodes_used < node_count) {
    result.report.failed = true;
    result.report.flags.push_back("fixed_nodes: stopped at " +
                                  std::to_string(result.report.nodes_used) + " of " +
                                  std::to_string(node_count) + " nodes");
  }
  evaluate(result, data);
  return result;
}

SuiteResult run_trials(const PreparedData& data, const LearnerConfig& config,
                       const TrialOptions& options, std::string label) {
  if (options.trials == 0) throw InvalidInput("trials must be at least 1");
  LearnerConfig effective = config;
  if (data.train.task == Task::classification) effective.epsilon = 0.0;

  std::vector<TrainResult> results(options.trials);
  std::vector<std::exception_ptr> errors(options.trials);
  auto run_one = [&](std::size_t t) {
    try {
      const std::uint64_t seed = options.base_seed + t;
      if (options.fixed_nodes) {
        results[t] = run_fixed_nodes(data, effective, *options.fixed_nodes, seed);
      } else {
        results[t] = train_learner(data.train, effective, seed);
        evaluate(results[t], data);
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, options.trials);
  if (workers == 1) {
    for (std::size_t t = 0; t < options.trials; ++t) run_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < options.trials; t = next++) run_one(t);
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SuiteResult suite;
  suite.label = std::move(label);
  suite.config = effective;
  suite.task = data.train.task;
  suite.trials = options.trials;
  suite.base_seed = options.base_seed;
  suite.fixed_nodes = options.fixed_nodes;

  const std::size_t m = data.train.outputs();
  std::vector<double> nodes, train_rmse, test_rmse, train_acc, test_acc;
  std::vector<std::vector<double>> train_q(m), test_q(m);
  Matrix sum(data.test.size(), m), sum_sq(data.test.size(), m);
  std::size_t ok = 0;
  for (auto& r : results) {
    const auto& rep = r.report;
    if (rep.failed) {
      ++suite.failed_trials;
    } else {
      ++ok;
      nodes.push_back(static_cast<double>(rep.nodes_used));
      train_rmse.push_back(rep.train_rmse);
      test_rmse.push_back(rep.test_rmse);
      for (std::size_t q = 0; q < m; ++q) {
        train_q[q].push_back(rep.train_rmse_per_output[q]);
        test_q[q].push_back(rep.test_rmse_per_output[q]);
      }
      if (rep.train_accuracy) train_acc.push_back(*rep.train_accuracy);
      if (rep.test_accuracy) test_acc.push_back(*rep.test_accuracy);
      const Matrix pred = predict(r.model, data.test.x);
      for (std::size_t k = 0; k < pred.data().size(); ++k) {
        sum.data()[k] += pred.data()[k];
        sum_sq.data()[k] += pred.data()[k] * pred.data()[k];
      }
    }
    suite.reports.push_back(rep);
    if (options.keep_models) suite.models.push_back(std::move(r.model));
  }

  suite.nodes = summarize(nodes);
  suite.train_rmse = summarize(train_rmse);
  suite.test_rmse = summarize(test_rmse);
  for (std::size_t q = 0; q < m; ++q) {
    suite.train_rmse_per_output.push_back(summarize(train_q[q]));
    suite.test_rmse_per_output.push_back(summarize(test_q[q]));
  }
  if (suite.task == Task::classification) {
    suite.train_accuracy = summarize(train_acc);
    suite.test_accuracy = summarize(test_acc);
  }
  suite.prediction_variance = Matrix(data.test.size(), m);
  if (ok > 0) {
    const double n = static_cast<double>(ok);
    for (std::size_t k = 0; k < sum.data().size(); ++k) {
      const double mean = sum.data()[k] / n;
      suite.prediction_variance.data()[k] = std::max(0.0, sum_sq.data()[k] / n - mean * mean);
    }
  }
  return suite;
}

nlohmann::json to_json(const LearnerConfig& c) {
  nlohmann::json j;
  j["algorithm"] = to_string(c.algorithm);
  j["L_max"] = c.l_max;
  j["epsilon"] = c.epsilon;
  j["lambda_grid"] = c.lambda_grid;
  if (c.algorithm == Algorithm::irvfln) {
    j["update"] = to_string(c.irvfln_update);
    return j;
  }
  j["T_max"] = c.t_max;
  j["max_r_retries"] = c.max_r_retries;
  j["escalation"] = to_string(c.escalation);
  if (c.algorithm == Algorithm::oscn) {
    j["sigma"] = c.sigma;
  } else {
    j["r"] = c.r;
    if (c.algorithm == Algorithm::sc2) j["window"] = c.window;
  }
  return j;
}

nlohmann::json to_json(const Stat& s) {
  return {{"ave", s.ave}, {"dev", s.dev}, {"min", s.min}, {"max", s.max}, {"count", s.count}};
}

nlohmann::json to_json(const TrialReport& r) {
  nlohmann::json j;
  j["algorithm"] = r.algorithm;
  j["seed"] = r.seed;
  j["nodes_used"] = r.nodes_used;
  j["train_rmse"] = r.train_rmse;
  j["test_rmse"] = r.test_rmse;
  j["train_rmse_per_output"] = r.train_rmse_per_output;
  j["test_rmse_per_output"] = r.test_rmse_per_output;
  if (r.train_accuracy) j["train_accuracy"] = *r.train_accuracy;
  if (r.test_accuracy) j["test_accuracy"] = *r.test_accuracy;
  j["escalation_events"] = r.escalation_events;
  j["residual_history"] = r.residual_history;
  j["accepted_lambda"] = r.accepted_lambda;
  j["tau_trace"] = r.tau_trace;
  if (!r.bound_trace.empty()) j["bound_trace"] = r.bound_trace;
  if (r.ortho) {
    const auto& o = *r.ortho;
    j["ortho"] = {{"max_basis_orthogonality", o.max_basis_orthogonality},
                  {"max_residual_orthogonality", o.max_residual_orthogonality},
                  {"reconstruction_error", o.reconstruction_error},
                  {"finalize_error", o.finalize_error},
                  {"least_squares_gap", o.least_squares_gap},
                  {"min_basis_norm", o.min_basis_norm},
                  {"contraction_violations", o.contraction_violations},
                  {"bound_violations", o.bound_violations},
                  {"reorthogonalizations", o.reorthogonalizations}};
  }
  j["failed"] = r.failed;
  j["flags"] = r.flags;
  return j;
}

nlohmann::json suite_to_json(const SuiteResult& s) {
  nlohmann::json j;
  j["label"] = s.label;
  j["config"] = to_json(s.config);
  j["task"] = to_string(s.task);
  j["trials"] = s.trials;
  j["base_seed"] = s.base_seed;
  if (s.fixed_nodes) j["fixed_nodes"] = *s.fixed_nodes;
  j["failed_trials"] = s.failed_trials;
  j["nodes"] = to_json(s.nodes);
  j["train_rmse"] = to_json(s.train_rmse);
  j["test_rmse"] = to_json(s.test_rmse);
  auto per_output = [](const std::vector<Stat>& stats) {
    auto arr = nlohmann::json::array();
    for (const auto& st : stats) arr.push_back(to_json(st));
    return arr;
  };
  j["train_rmse_per_output"] = per_output(s.train_rmse_per_output);
  j["test_rmse_per_output"] = per_output(s.test_rmse_per_output);
  if (s.train_accuracy) j["train_accuracy"] = to_json(*s.train_accuracy);
  if (s.test_accuracy) j["test_accuracy"] = to_json(*s.test_accuracy);
  auto var = nlohmann::json::array();
  for (std::size_t i = 0; i < s.prediction_variance.rows(); ++i) {
    const auto row = s.prediction_variance.row(i);
    var.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["prediction_variance"] = std::move(var);
  auto reports = nlohmann::json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r));
  j["reports"] = std::move(reports);
  return j;
}

void write_residual_csv(const std::vector<SuiteResult>& suites, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "label,trial,seed,rmse_by_node\n";
  for (const auto& s : suites) {
    for (std::size_t t = 0; t < s.reports.size(); ++t) {
      const auto& r = s.reports[t];
      out << s.label << ',' << t << ',' << r.seed;
      for (double v : r.residual_history) out << ',' << v;
      out << '\n';
    }
  }
}

void write_timing_csv(const std::vector<SuiteResult>& suites, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "label,trial,seed,nodes_used,wall_time_seconds\n";
  for (const auto& s : suites)
    for (std::size_t t = 0; t < s.reports.size(); ++t)
      out << s.label << ',' << t << ',' << s.reports[t].seed << ',' << s.reports[t].nodes_used << ','
          << s.reports[t].wall_time_seconds << '\n';
}

void write_variance_csv(const SuiteResult& suite, const Matrix& test_x,
                        const std::filesystem::path& path) {
  if (test_x.rows() != suite.prediction_variance.rows())
    throw InvalidInput("variance csv: input rows do not match the variance matrix");
  auto out = open_out(path);
  for (std::size_t c = 0; c < test_x.cols(); ++c) out << 'x' << c + 1 << ',';
  for (std::size_t q = 0; q < suite.prediction_variance.cols(); ++q)
    out << (q ? "," : "") << "var_y" << q + 1;
  out << '\n';
  for (std::size_t i = 0; i < test_x.rows(); ++i) {
    for (double v : test_x.row(i)) out << v << ',';
    const auto row = suite.prediction_variance.row(i);
    for (std::size_t q = 0; q < row.size(); ++q) out << (q ? "," : "") << row[q];
    out << '\n';
  }
}

bool has_failures(const SuiteResult& suite) {
  for (const auto& r : suite.reports) {
    if (r.failed) return true;
    for (const auto& f : r.flags)
      if (f.rfind("invariant:", 0) == 0) return true;
  }
  return false;
}

}  // namespace confignet
