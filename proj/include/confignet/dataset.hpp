#pragma once

#include "confignet/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace confignet {

enum class Task { regression, classification };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

/// Raised by load_csv; the message names the offending row and column.
class LoadError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per-column min/max recorded by min-max scaling.
struct ColumnRange {
  std::vector<double> min;
  std::vector<double> max;
};

struct NormMeta {
  ColumnRange features;
  /// Only populated for regression; classification targets are never scaled.
  std::optional<ColumnRange> targets;
};

struct Dataset {
  Matrix x;
  Matrix t;
  Task task = Task::regression;
  /// Sorted distinct labels; column q of t is class_labels[q].
  std::vector<std::string> class_labels;
  std::optional<NormMeta> norm_meta;

  std::size_t size() const noexcept { return x.rows(); }
  std::size_t inputs() const noexcept { return x.cols(); }
  std::size_t outputs() const noexcept { return t.cols(); }
};

struct SplitSpec {
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::uint64_t shuffle_seed = 0;
};

/// Reads a comma-separated file whose trailing `target_cols` columns are
/// targets. For classification the single target column holds class labels
/// (any text) and is one-hot encoded. Without an explicit task, a
/// non-numeric target column selects classification.
Dataset load_csv(const std::filesystem::path& path, std::size_t target_cols, bool has_header,
                 std::optional<Task> task = std::nullopt);

/// Min/max of every feature column and, for regression, every target column.
NormMeta fit_minmax(const Dataset& ds);

/// Maps columns through (x - min) / (max - min) using `meta`; constant
/// columns map to 0. Values outside the fitted range are not clipped.
Dataset apply_minmax(const Dataset& ds, const NormMeta& meta);

/// Fits and applies min-max scaling on the same dataset.
Dataset minmax_normalize(const Dataset& ds);

/// Inverse of the column map for a single range set.
Matrix denormalize(const Matrix& scaled, const ColumnRange& range);

/// One-hot encoding over the lexicographically sorted distinct labels.
std::pair<Matrix, std::vector<std::string>> one_hot_encode(const std::vector<std::string>& labels);

/// Deterministic shuffle by seed, then the first train_count rows form the
/// training set and the next test_count rows the test set.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

/// Train/test pair scaled with statistics of the training portion only.
struct PreparedData {
  Dataset train;
  Dataset test;
  NormMeta scaling;
};

PreparedData prepare(const Dataset& raw, const SplitSpec& spec);

double scalar_function(double x);
std::pair<double, double> multi_output_function(double x1, double x2);

/// n samples of x ~ U[0,1] with targets from the three-bump scalar function.
Dataset gen_scalar_function(std::size_t n, std::uint64_t seed);

/// n samples of (x1, x2) ~ N(-0.5, variance 0.2) with the two coupled
/// exponential targets.
Dataset gen_multi_output(std::size_t n, std::uint64_t seed);

}  // namespace confignet
