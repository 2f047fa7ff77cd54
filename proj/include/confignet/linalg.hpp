#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace confignet {

/// Thrown when an operation receives arguments that violate its contract
/// (shape mismatch, out-of-range parameter, malformed triangular factor).
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a training-time structure no longer satisfies its own invariants.
class ConsistencyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  Vector col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> values);

  /// Appends a column; an empty matrix adopts the column's length as its row count.
  void append_col(std::span<const double> values);

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double inner(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> v);
double frob_norm(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix subtract(const Matrix& a, const Matrix& b);

/// Builds an N×k matrix whose columns are the given equal-length vectors.
Matrix from_columns(std::span<const Vector> columns, std::size_t rows);

/// Solves R·X = B for unit upper triangular R by back-substitution.
Matrix solve_unit_upper(const Matrix& r, const Matrix& b);

/// Relative singular value cutoff used by lstsq_pinv.
inline constexpr double kPinvRelativeCutoff = 1e-10;

/// Minimum-norm least-squares solution A⁺·B through a singular value
/// decomposition. Singular values below kPinvRelativeCutoff times the largest
/// one are treated as zero, so rank-deficient A is handled without error.
Matrix lstsq_pinv(const Matrix& a, const Matrix& b);

void require_finite(const Matrix& m, const std::string& what);

}  // namespace confignet
