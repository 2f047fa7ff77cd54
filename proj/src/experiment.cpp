#include "confignet/experiment.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace confignet {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw InvalidInput(where + ": unknown field '" + key + "'");
}

template <typename T>
T field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config field '") + key + "' has the wrong type");
  }
}

std::vector<double> parse_grid(const json& value) {
  if (value.is_string()) return parse_scope(value.get<std::string>());
  if (value.is_number()) return {value.get<double>()};
  if (value.is_array()) {
    std::vector<double> out;
    for (const auto& v : value) {
      if (!v.is_number()) throw InvalidInput("lambda_grid entries must be numbers");
      out.push_back(v.get<double>());
    }
    if (out.empty()) throw InvalidInput("lambda_grid is empty");
    return out;
  }
  throw InvalidInput("lambda_grid must be a scope string, number or array");
}

bool is_number(std::string_view cell) {
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

ExperimentConfig parse_experiment(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc,
                 {"algorithm", "dataset", "L_max", "T_max", "epsilon", "sigma", "lambda_grid", "r",
                  "window", "trials", "base_seed", "max_r_retries", "escalation", "update",
                  "fixed_nodes"},
                 "config");
  ExperimentConfig cfg;
  auto& l = cfg.learner;
  if (!doc.contains("algorithm")) throw InvalidInput("config: 'algorithm' is required");
  l.algorithm = algorithm_from_string(field<std::string>(doc, "algorithm", ""));
  l.l_max = field<std::size_t>(doc, "L_max", l.l_max);
  l.t_max = field<std::size_t>(doc, "T_max", l.t_max);
  l.epsilon = field<double>(doc, "epsilon", l.epsilon);
  l.sigma = field<double>(doc, "sigma", l.sigma);
  l.r = field<double>(doc, "r", l.r);
  l.window = field<std::size_t>(doc, "window", l.window);
  l.max_r_retries = field<std::size_t>(doc, "max_r_retries", l.max_r_retries);
  if (doc.contains("lambda_grid")) l.lambda_grid = parse_grid(doc.at("lambda_grid"));
  if (doc.contains("escalation"))
    l.escalation = escalation_from_string(field<std::string>(doc, "escalation", ""));
  if (doc.contains("update"))
    l.irvfln_update = irvfln_update_from_string(field<std::string>(doc, "update", ""));
  cfg.trials = field<std::size_t>(doc, "trials", cfg.trials);
  cfg.base_seed = field<std::uint64_t>(doc, "base_seed", cfg.base_seed);
  if (doc.contains("fixed_nodes")) cfg.fixed_nodes = field<std::size_t>(doc, "fixed_nodes", 0);
  if (cfg.trials == 0) throw InvalidInput("config: trials must be at least 1");

  if (!doc.contains("dataset")) throw InvalidInput("config: 'dataset' is required");
  const json& ds = doc.at("dataset");
  reject_unknown(ds, {"path", "synth", "target_cols", "has_header", "task", "split"}, "dataset");
  auto& d = cfg.dataset;
  if (ds.contains("path") == ds.contains("synth"))
    throw InvalidInput("dataset: give exactly one of 'path' and 'synth'");
  if (ds.contains("path")) {
    std::filesystem::path p = field<std::string>(ds, "path", "");
    d.path = p.is_relative() ? base_dir / p : p;
  } else {
    const json& s = ds.at("synth");
    reject_unknown(s, {"which", "n", "seed"}, "dataset.synth");
    SynthSpec spec;
    spec.which = field<std::string>(s, "which", spec.which);
    spec.n = field<std::size_t>(s, "n", spec.n);
    spec.seed = field<std::uint64_t>(s, "seed", spec.seed);
    d.synth = spec;
  }
  d.target_cols = field<std::size_t>(ds, "target_cols", d.target_cols);
  if (ds.contains("has_header")) d.has_header = field<bool>(ds, "has_header", true);
  if (ds.contains("task")) d.task = task_from_string(field<std::string>(ds, "task", ""));
  if (!ds.contains("split")) throw InvalidInput("dataset: 'split' is required");
  const json& sp = ds.at("split");
  reject_unknown(sp, {"train", "test", "seed"}, "dataset.split");
  d.split.train_count = field<std::size_t>(sp, "train", 0);
  d.split.test_count = field<std::size_t>(sp, "test", 0);
  d.split.shuffle_seed = field<std::uint64_t>(sp, "seed", 0);
  if (d.split.train_count == 0) throw InvalidInput("dataset.split: train must be at least 1");
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw LoadError("cannot open config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(file.string() + ": " + e.what());
  }
  return parse_experiment(doc, file.parent_path());
}

Dataset make_synthetic(const SynthSpec& spec) {
  if (spec.which == "eq26") return gen_scalar_function(spec.n, spec.seed);
  if (spec.which == "eq27") return gen_multi_output(spec.n, spec.seed);
  throw InvalidInput("unknown synthetic dataset '" + spec.which + "' (expected eq26 or eq27)");
}

bool csv_has_header(const std::filesystem::path& path, std::size_t target_cols) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> cells;
  std::stringstream stream(line);
  for (std::string cell; std::getline(stream, cell, ',');) cells.push_back(cell);
  const std::size_t features = cells.size() > target_cols ? cells.size() - target_cols : 0;
  for (std::size_t c = 0; c < features; ++c)
    if (!is_number(cells[c])) return true;
  return false;
}

Dataset load_dataset(const DatasetSpec& spec) {
  if (spec.synth) return make_synthetic(*spec.synth);
  if (!spec.path) throw InvalidInput("dataset has neither a path nor a synthetic spec");
  const bool header = spec.has_header ? *spec.has_header : csv_has_header(*spec.path, spec.target_cols);
  return load_csv(*spec.path, spec.target_cols, header, spec.task);
}

PreparedData prepare_dataset(const DatasetSpec& spec) { return prepare(load_dataset(spec), spec.split); }

}  // namespace confignet
