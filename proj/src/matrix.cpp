#include "quadinv/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "quadinv/error.hpp"

namespace quadinv {

namespace {

void require_shape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("matrix dimensions must be positive, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

std::string shape(const Matrix& a) { return std::to_string(a.rows()) + "x" + std::to_string(a.cols()); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

// c[i,:] = sum_k a[i,k] * b[k,:] for rows in [begin, end), k ascending.
void matmul_rows(const Matrix& a, const Matrix& b, Matrix& c, std::size_t begin, std::size_t end) {
  const std::size_t inner = a.cols();
  const std::size_t cols = b.cols();
  for (std::size_t i = begin; i < end; ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a(i, k);
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < cols; ++j) {
        out[j] += aik * brow[j];
      }
    }
  }
}

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_() {
  require_shape(rows, cols);
  data_.assign(rows * cols, 0.0);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_shape(rows, cols);
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(*this, "matrix construction");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  require_shape(rows_, cols_);
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw DimensionError("ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(*this, "matrix construction");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    m(i, i) = diag[i];
  }
  require_finite(m, "diagonal");
  return m;
}

Matrix Matrix::basis_column(std::size_t n, std::size_t i) {
  if (i >= n) {
    throw DimensionError("basis index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
  }
  Matrix e(n, 1);
  e(i, 0) = 1.0;
  return e;
}

Matrix Matrix::column(std::size_t j) const {
  if (j >= cols_) {
    throw DimensionError("column index out of range");
  }
  Matrix c(rows_, 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    c(i, 0) = (*this)(i, j);
  }
  return c;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "add");
  for (std::size_t k = 0; k < data_.size(); ++k) {
    data_[k] += other.data_[k];
  }
  require_finite(*this, "add");
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "subtract");
  for (std::size_t k = 0; k < data_.size(); ++k) {
    data_[k] -= other.data_[k];
  }
  require_finite(*this, "subtract");
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) {
    v *= s;
  }
  require_finite(*this, "scale");
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b, unsigned threads) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape(a) + " * " + shape(b));
  }
  Matrix c(a.rows(), b.cols());
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, a.rows());
  if (workers == 1) {
    matmul_rows(a, b, c, 0, a.rows());
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (a.rows() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(a.rows(), begin + chunk);
      if (begin >= end) {
        break;
      }
      pool.emplace_back([&, begin, end] { matmul_rows(a, b, c, begin, end); });
    }
  }
  require_finite(c, "matmul");
  return c;
}

Matrix multiply_chain(std::initializer_list<const Matrix*> factors) {
  if (factors.size() == 0) {
    throw PreconditionError("multiply_chain needs at least one factor");
  }
  auto it = factors.begin();
  Matrix acc = **it;
  for (++it; it != factors.end(); ++it) {
    acc = matmul(acc, **it);
  }
  return acc;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      t(j, i) = a(i, j);
    }
  }
  return t;
}

double squared_frobenius_norm(const Matrix& a) noexcept {
  double s = 0.0;
  for (double v : a.data()) {
    s += v * v;
  }
  return s;
}

double frobenius_norm(const Matrix& a) noexcept { return std::sqrt(squared_frobenius_norm(a)); }

double trace(const Matrix& a) {
  if (!a.is_square()) {
    throw DimensionError("trace of non-square " + shape(a));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    s += a(i, i);
  }
  return s;
}

Matrix identity_minus(const Matrix& a) {
  if (!a.is_square()) {
    throw DimensionError("identity_minus of non-square " + shape(a));
  }
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      r(i, j) = (i == j ? 1.0 : 0.0) - a(i, j);
    }
  }
  return r;
}

void require_finite(const Matrix& a, const char* what) {
  for (double v : a.data()) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
  }
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) {
    throw DimensionError("matvec: vector length does not match " + shape(a));
  }
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    y[i] = dot(a.row(i), x);
  }
  return y;
}

std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> y) {
  if (y.size() != a.rows()) {
    throw DimensionError("matvec_transposed: vector length does not match " + shape(a));
  }
  std::vector<double> x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double yi = y[i];
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      x[j] += yi * r[j];
    }
  }
  return x;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += a[k] * b[k];
  }
  return s;
}

} // namespace quadinv
