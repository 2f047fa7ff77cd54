#include "confignet/dataset.hpp"

#include "confignet/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace confignet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_real(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || cell.empty() || !std::isfinite(value)) return std::nullopt;
  return value;
}

ColumnRange column_range(const Matrix& m) {
  ColumnRange range{std::vector<double>(m.cols()), std::vector<double>(m.cols())};
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double lo = m.rows() ? m(0, c) : 0.0;
    double hi = lo;
    for (std::size_t r = 1; r < m.rows(); ++r) {
      lo = std::min(lo, m(r, c));
      hi = std::max(hi, m(r, c));
    }
    range.min[c] = lo;
    range.max[c] = hi;
  }
  return range;
}

Matrix scale_columns(const Matrix& m, const ColumnRange& range) {
  if (range.min.size() != m.cols()) throw InvalidInput("scaling metadata has wrong width");
  Matrix out(m.rows(), m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const double span = range.max[c] - range.min[c];
    for (std::size_t r = 0; r < m.rows(); ++r) {
      out(r, c) = span > 0.0 ? (m(r, c) - range.min[c]) / span : 0.0;
    }
  }
  return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(m.row(idx[i]).begin(), m.cols(), out.row(i).begin());
  }
  return out;
}

}  // namespace

std::string to_string(Task task) {
  return task == Task::regression ? "regression" : "classification";
}

Task task_from_string(const std::string& name) {
  if (name == "regression") return Task::regression;
  if (name == "classification") return Task::classification;
  throw InvalidInput("unknown task '" + name + "'");
}

Dataset load_csv(const std::filesystem::path& path, std::size_t target_cols, bool has_header,
                 std::optional<Task> task) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  if (target_cols == 0) throw LoadError(path.string() + ": target_cols must be at least 1");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (has_header && line_no == 1) continue;
    auto cells = split_cells(line);
    if (rows.empty()) {
      width = cells.size();
      if (width <= target_cols) {
        throw LoadError(path.string() + ": row " + std::to_string(line_no) + " has " +
                        std::to_string(width) + " columns, need more than " +
                        std::to_string(target_cols));
      }
    } else if (cells.size() != width) {
      throw LoadError(path.string() + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(width));
    }
    rows.emplace_back(cells.begin(), cells.end());
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw LoadError(path.string() + ": no data rows");

  const std::size_t n = rows.size();
  const std::size_t d = width - target_cols;

  Dataset ds;
  ds.x = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      auto v = parse_real(rows[i][c]);
      if (!v) {
        throw LoadError(path.string() + ": row " + std::to_string(line_numbers[i]) + " column " +
                        std::to_string(c + 1) + ": non-numeric feature '" + rows[i][c] + "'");
      }
      ds.x(i, c) = *v;
    }
  }

  bool numeric_targets = true;
  for (std::size_t i = 0; i < n && numeric_targets; ++i)
    for (std::size_t c = d; c < width; ++c)
      if (!parse_real(rows[i][c])) {
        numeric_targets = false;
        break;
      }

  ds.task = task.value_or(numeric_targets ? Task::regression : Task::classification);
  if (ds.task == Task::classification) {
    if (target_cols != 1) {
      throw LoadError(path.string() + ": classification expects a single label column");
    }
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = rows[i][d];
    std::tie(ds.t, ds.class_labels) = one_hot_encode(labels);
  } else {
    ds.t = Matrix(n, target_cols);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < target_cols; ++c) {
        auto v = parse_real(rows[i][d + c]);
        if (!v) {
          throw LoadError(path.string() + ": row " + std::to_string(line_numbers[i]) +
                          " column " + std::to_string(d + c + 1) + ": non-numeric target '" +
                          rows[i][d + c] + "'");
        }
        ds.t(i, c) = *v;
      }
    }
  }
  return ds;
}

NormMeta fit_minmax(const Dataset& ds) {
  NormMeta meta;
  meta.features = column_range(ds.x);
  if (ds.task == Task::regression) meta.targets = column_range(ds.t);
  return meta;
}

Dataset apply_minmax(const Dataset& ds, const NormMeta& meta) {
  Dataset out = ds;
  out.x = scale_columns(ds.x, meta.features);
  if (ds.task == Task::regression && meta.targets) out.t = scale_columns(ds.t, *meta.targets);
  out.norm_meta = meta;
  return out;
}

Dataset minmax_normalize(const Dataset& ds) { return apply_minmax(ds, fit_minmax(ds)); }

Matrix denormalize(const Matrix& scaled, const ColumnRange& range) {
  if (range.min.size() != scaled.cols()) throw InvalidInput("scaling metadata has wrong width");
  Matrix out(scaled.rows(), scaled.cols());
  for (std::size_t c = 0; c < scaled.cols(); ++c) {
    const double span = range.max[c] - range.min[c];
    for (std::size_t r = 0; r < scaled.rows(); ++r) {
      out(r, c) = range.min[c] + scaled(r, c) * span;
    }
  }
  return out;
}

std::pair<Matrix, std::vector<std::string>> one_hot_encode(const std::vector<std::string>& labels) {
  const std::set<std::string> distinct(labels.begin(), labels.end());
  std::vector<std::string> order(distinct.begin(), distinct.end());
  Matrix m(labels.size(), order.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(order.begin(), order.end(), labels[i]);
    m(i, static_cast<std::size_t>(it - order.begin())) = 1.0;
  }
  return {std::move(m), std::move(order)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  if (spec.train_count + spec.test_count > ds.size()) {
    throw InvalidInput("split: " + std::to_string(spec.train_count) + "+" +
                       std::to_string(spec.test_count) + " rows requested from " +
                       std::to_string(ds.size()));
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.shuffle_seed);
  rng.shuffle(std::span<std::size_t>(order));

  auto take = [&](std::size_t offset, std::size_t count) {
    std::span<const std::size_t> idx(order.data() + offset, count);
    Dataset part = ds;
    part.x = select_rows(ds.x, idx);
    part.t = select_rows(ds.t, idx);
    return part;
  };
  return {take(0, spec.train_count), take(spec.train_count, spec.test_count)};
}

PreparedData prepare(const Dataset& raw, const SplitSpec& spec) {
  auto [train, test] = split(raw, spec);
  PreparedData out;
  out.scaling = fit_minmax(train);
  out.train = apply_minmax(train, out.scaling);
  out.test = apply_minmax(test, out.scaling);
  return out;
}

double scalar_function(double x) {
  const double a = 10.0 * x - 4.0;
  const double b = 80.0 * x - 40.0;
  const double c = 80.0 * x - 20.0;
  return 0.2 * std::exp(-a * a) + 0.5 * std::exp(-b * b) + 0.3 * std::exp(-c * c);
}

std::pair<double, double> multi_output_function(double x1, double x2) {
  constexpr double pi = 3.14159265358979323846;
  const double x3 = x1 + x2;
  const double x4 = x1 - x2;
  const double y1 = std::exp(2.0 * x1 * std::sin(pi * x4) + std::sin(x2 * x3));
  const double y2 = std::exp(2.0 * x2 * std::cos(pi * x3) + std::cos(x1 * x4));
  return {y1, y2};
}

Dataset gen_scalar_function(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("gen_scalar_function: n must be at least 1");
  Rng rng(seed);
  Dataset ds;
  ds.x = Matrix(n, 1);
  ds.t = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.canonical();
    ds.x(i, 0) = x;
    ds.t(i, 0) = scalar_function(x);
  }
  return ds;
}

Dataset gen_multi_output(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("gen_multi_output: n must be at least 1");
  Rng rng(seed);
  const double stddev = std::sqrt(0.2);
  Dataset ds;
  ds.x = Matrix(n, 2);
  ds.t = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.normal(-0.5, stddev);
    const double x2 = rng.normal(-0.5, stddev);
    const auto [y1, y2] = multi_output_function(x1, x2);
    ds.x(i, 0) = x1;
    ds.x(i, 1) = x2;
    ds.t(i, 0) = y1;
    ds.t(i, 1) = y2;
  }
  return ds;
}

}  // namespace confignet
