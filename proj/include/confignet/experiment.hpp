#pragma once

#include "confignet/harness.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace confignet {

struct SynthSpec {
  std::string which = "eq26";  // eq26 (scalar) or eq27 (two outputs)
  std::size_t n = 1000;
  std::uint64_t seed = 1;
};

struct DatasetSpec {
  std::optional<std::filesystem::path> path;
  std::optional<SynthSpec> synth;
  std::size_t target_cols = 1;
  /// Detected from the first line when absent.
  std::optional<bool> has_header;
  std::optional<Task> task;
  SplitSpec split;
};

struct ExperimentConfig {
  LearnerConfig learner;
  DatasetSpec dataset;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::optional<std::size_t> fixed_nodes;
};

/// Relative dataset paths are resolved against `base_dir`. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
ExperimentConfig parse_experiment(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& file);

Dataset make_synthetic(const SynthSpec& spec);

/// True when some feature cell (all but the trailing target_cols) of the
/// first line is not a number.
bool csv_has_header(const std::filesystem::path& path, std::size_t target_cols);

Dataset load_dataset(const DatasetSpec& spec);
PreparedData prepare_dataset(const DatasetSpec& spec);

}  // namespace confignet
