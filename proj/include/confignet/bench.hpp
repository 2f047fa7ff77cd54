#pragma once

#include "confignet/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace confignet {

struct BenchOptions {
  std::string suite;  // table1, table2, regression, classification
  std::filesystem::path data_dir = ".";
  std::size_t trials = 50;
  std::uint64_t base_seed = 0;
  std::size_t threads = 1;
};

struct BenchResult {
  /// Deterministic for fixed options: no timings.
  nlohmann::json report;
  std::vector<SuiteResult> suites;
  /// Test inputs per suite label, kept for the variance CSVs.
  std::vector<std::pair<std::string, Matrix>> variance_inputs;
  bool failures = false;
};

std::vector<std::string> bench_suites();

/// Runs a named suite and prints a comparison table with reference values to
/// `table`. Regression and classification cases whose CSV is missing from
/// data_dir are skipped and listed in the report.
BenchResult run_bench(const BenchOptions& options, std::ostream& table);

/// Writes report.json, residual_histories.csv, timing.csv and, for suites
/// that carry them, per-sample variance CSVs.
void write_bench_outputs(const BenchResult& result, const std::filesystem::path& dir);

}  // namespace confignet
