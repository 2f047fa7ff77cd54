#include "confignet/cli.hpp"

#include "confignet/bench.hpp"
#include "confignet/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace confignet {

namespace {

constexpr int kOk = 0;
constexpr int kFlagged = 1;
constexpr int kUsage = 2;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream stream(line);
  for (std::string cell; std::getline(stream, cell, ',');) cells.push_back(cell);
  return cells;
}

bool parse_cell(std::string cell, double& value) {
  const auto first = cell.find_first_not_of(" \t\r");
  const auto last = cell.find_last_not_of(" \t\r");
  if (first == std::string::npos) return false;
  cell = cell.substr(first, last - first + 1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

/// First `d` columns of every row; extra trailing columns are ignored and a
/// non-numeric first line is taken as a header.
Matrix read_features(const std::filesystem::path& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<double> entries;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_cells(line);
    if (cells.size() < d)
      throw LoadError(fmt::format("{}: row {} has {} columns, model expects {}", path.string(),
                                  line_no, cells.size(), d));
    std::vector<double> row(d);
    bool numeric = true;
    for (std::size_t c = 0; c < d && numeric; ++c) numeric = parse_cell(cells[c], row[c]);
    if (!numeric) {
      if (rows == 0 && line_no == 1) continue;
      throw LoadError(fmt::format("{}: row {} has a non-numeric feature", path.string(), line_no));
    }
    entries.insert(entries.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw LoadError(path.string() + ": no data rows");
  return Matrix(rows, d, std::move(entries));
}

int cmd_train(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
              std::size_t threads, std::ostream& out) {
  const ExperimentConfig cfg = load_experiment(config_path);
  const PreparedData data = prepare_dataset(cfg.dataset);
  TrialOptions options;
  options.trials = cfg.trials;
  options.base_seed = cfg.base_seed;
  options.threads = threads;
  options.keep_models = true;
  options.fixed_nodes = cfg.fixed_nodes;
  SuiteResult suite = run_trials(data, cfg.learner, options, to_string(cfg.learner.algorithm));

  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "report.json", suite_to_json(suite).dump(2) + "\n");
  write_residual_csv({suite}, out_dir / "residual_histories.csv");
  write_timing_csv({suite}, out_dir / "timing.csv");
  for (std::size_t t = 0; t < suite.models.size(); ++t) {
    if (suite.reports[t].failed) continue;
    save_model(suite.models[t], out_dir / "model.json");
    break;
  }

  out << fmt::format("{}: {} trial(s), {} failed\n", suite.label, suite.trials, suite.failed_trials);
  out << fmt::format("  nodes      {:.2f} +- {:.4f}\n", suite.nodes.ave, suite.nodes.dev);
  out << fmt::format("  train RMSE {:.4f} +- {:.4f}\n", suite.train_rmse.ave, suite.train_rmse.dev);
  out << fmt::format("  test RMSE  {:.4f} +- {:.4f}\n", suite.test_rmse.ave, suite.test_rmse.dev);
  if (suite.test_accuracy) {
    out << fmt::format("  train acc  {:.4f} +- {:.4f}\n", suite.train_accuracy->ave,
                       suite.train_accuracy->dev);
    out << fmt::format("  test acc   {:.4f} +- {:.4f}\n", suite.test_accuracy->ave,
                       suite.test_accuracy->dev);
  }
  out << "  written to " << out_dir.string() << "\n";
  return has_failures(suite) ? kFlagged : kOk;
}

int cmd_bench(const BenchOptions& options, const std::optional<std::filesystem::path>& out_dir,
              std::ostream& out) {
  const BenchResult result = run_bench(options, out);
  if (out_dir) {
    write_bench_outputs(result, *out_dir);
    out << "written to " << out_dir->string() << "\n";
  }
  return result.failures ? kFlagged : kOk;
}

int cmd_synth(const SynthSpec& spec, const std::filesystem::path& path) {
  const Dataset ds = make_synthetic(spec);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t c = 0; c < ds.inputs(); ++c) out << 'x' << c + 1 << ',';
  for (std::size_t q = 0; q < ds.outputs(); ++q) out << (q ? "," : "") << 'y' << q + 1;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.x.row(i)) out << v << ',';
    const auto t = ds.t.row(i);
    for (std::size_t q = 0; q < t.size(); ++q) out << (q ? "," : "") << t[q];
    out << '\n';
  }
  return kOk;
}

int cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                const std::filesystem::path& out_path) {
  const NetworkModel model = load_model(model_path);
  Matrix x = read_features(data_path, model.d);
  const auto& meta = model.metadata;
  if (meta) {
    Dataset ds;
    ds.x = std::move(x);
    ds.t = Matrix(ds.x.rows(), 0);
    NormMeta features_only{meta->scaling.features, std::nullopt};
    x = apply_minmax(ds, features_only).x;
  }
  Matrix y = predict(model, x);
  const bool classify = meta && meta->task == Task::classification;
  if (meta && !classify && meta->scaling.targets) y = denormalize(y, *meta->scaling.targets);

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path.string());
  out.precision(17);
  if (classify) out << "label,";
  for (std::size_t q = 0; q < y.cols(); ++q) out << (q ? "," : "") << 'y' << q + 1;
  out << '\n';
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const auto row = y.row(i);
    if (classify) {
      std::size_t best = 0;
      for (std::size_t q = 1; q < row.size(); ++q)
        if (row[q] > row[best]) best = q;
      out << meta->class_labels.at(best) << ',';
    }
    for (std::size_t q = 0; q < row.size(); ++q) out << (q ? "," : "") << row[q];
    out << '\n';
  }
  return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized incremental network learners: IRVFLN, SCN and OSCN"};
  app.require_subcommand(1);

  std::filesystem::path config_path;
  std::filesystem::path train_out = ".";
  std::size_t threads = 1;
  auto* train = app.add_subcommand("train", "Run the trials described by a JSON config");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--out", train_out, "Output directory");
  train->add_option("--threads", threads, "Worker threads for trials")->check(CLI::PositiveNumber);
  train->footer(
      "OSCN's sigma is compared with the unnormalized norm of the orthogonalized candidate\n"
      "vector over the training set. Norms grow like sqrt(N), so the same sigma is relatively\n"
      "looser on larger training sets.");

  BenchOptions bench_opts;
  std::optional<std::filesystem::path> bench_out;
  auto* bench = app.add_subcommand("bench", "Reproduce a comparison table");
  bench->add_option("--suite", bench_opts.suite, "table1, table2, regression or classification")
      ->required()
      ->check(CLI::IsMember(bench_suites()));
  bench->add_option("--data-dir", bench_opts.data_dir, "Directory holding the real-world CSVs");
  bench->add_option("--trials", bench_opts.trials, "Trials per configuration")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_opts.base_seed, "Base seed; trial t uses seed + t");
  bench->add_option("--threads", bench_opts.threads, "Worker threads for trials")
      ->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Directory for report.json and CSVs");

  SynthSpec synth_spec;
  std::filesystem::path synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  synth->add_option("--which", synth_spec.which, "eq26 or eq27")
      ->required()
      ->check(CLI::IsMember({"eq26", "eq27"}));
  synth->add_option("--n", synth_spec.n, "Sample count")->required()->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_spec.seed, "Generator seed")->required();
  synth->add_option("--out", synth_out, "Output CSV")->required();

  std::filesystem::path model_path, data_path, predict_out;
  auto* pred = app.add_subcommand("predict", "Apply a saved model to a CSV of inputs");
  pred->add_option("--model", model_path, "Model JSON")->required();
  pred->add_option("--data", data_path, "Input CSV; the first d columns are used")->required();
  pred->add_option("--out", predict_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(config_path, train_out, threads, out);
    if (*bench) return cmd_bench(bench_opts, bench_out, out);
    if (*synth) return cmd_synth(synth_spec, synth_out);
    if (*pred) return cmd_predict(model_path, data_path, predict_out);
  } catch (const ConsistencyError& e) {
    err << "error: internal consistency: " << e.what() << "\n";
    return kFlagged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace confignet
