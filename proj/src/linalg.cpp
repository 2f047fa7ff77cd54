#include "confignet/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace confignet {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_eigen(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw InvalidInput("matrix entry count does not match " + std::to_string(rows) + "x" +
                       std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidInput("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::col(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_col(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_) throw InvalidInput("column length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

void Matrix::append_col(std::span<const double> values) {
  if (cols_ == 0) rows_ = values.size();
  if (values.size() != rows_) throw InvalidInput("column length mismatch");
  std::vector<double> next(rows_ * (cols_ + 1));
  for (std::size_t r = 0; r < rows_; ++r) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_), cols_,
                next.begin() + static_cast<std::ptrdiff_t>(r * (cols_ + 1)));
    next[r * (cols_ + 1) + cols_] = values[r];
  }
  data_ = std::move(next);
  ++cols_;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double inner(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidInput("inner: length " + std::to_string(u.size()) + " vs " +
                       std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(inner(v, v)); }

double frob_norm(const Matrix& m) { return norm(m.data()); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidInput("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("subtract: shape mismatch");
  }
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

Matrix from_columns(std::span<const Vector> columns, std::size_t rows) {
  Matrix out(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) out.set_col(j, columns[j]);
  return out;
}

Matrix solve_unit_upper(const Matrix& r, const Matrix& b) {
  const std::size_t n = r.rows();
  if (r.cols() != n) throw InvalidInput("solve_unit_upper: R is not square");
  if (b.rows() != n) throw InvalidInput("solve_unit_upper: B row count differs from R");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(r(i, i) - 1.0) > 1e-12) {
      throw InvalidInput("solve_unit_upper: diagonal entry " + std::to_string(i) + " is not 1");
    }
  }
  Matrix x = b;
  for (std::size_t i = n; i-- > 0;) {
    auto xi = x.row(i);
    for (std::size_t k = i + 1; k < n; ++k) {
      const double rik = r(i, k);
      if (rik == 0.0) continue;
      auto xk = x.row(k);
      for (std::size_t q = 0; q < x.cols(); ++q) xi[q] -= rik * xk[q];
    }
  }
  return x;
}

Matrix lstsq_pinv(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw InvalidInput("lstsq_pinv: A and B row counts differ");
  if (a.cols() == 0) return Matrix(0, b.cols());
  if (a.rows() == 0 || b.cols() == 0) return Matrix(a.cols(), b.cols());

  Eigen::MatrixXd dense = as_eigen(a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kPinvRelativeCutoff);
  Eigen::MatrixXd rhs = as_eigen(b);
  RowMajor x = svd.solve(rhs);
  return Matrix(a.cols(), b.cols(), std::vector<double>(x.data(), x.data() + x.size()));
}

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.all_finite()) throw InvalidInput(what + " contains non-finite entries");
}

}  // namespace confignet
