#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quadinv {

/// Dense row-major matrix of doubles.
///
/// Shapes are always at least 1x1. Entries are finite: constructors and the
/// free functions below raise NonFiniteError instead of returning NaN or Inf.
class Matrix {
public:
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  /// n x 1 column holding the i-th standard basis vector.
  static Matrix basis_column(std::size_t n, std::size_t i);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }
  std::span<double> row(std::size_t i) noexcept { return std::span<double>(data_).subspan(i * cols_, cols_); }

  /// Copy of column j as an n x 1 matrix.
  Matrix column(std::size_t j) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

/// Product a*b. Each output entry is accumulated sequentially over k = 0..K-1,
/// so the result is bit-identical for any thread count; threads only split
/// the output rows.
Matrix matmul(const Matrix& a, const Matrix& b, unsigned threads = 1);

/// Left-to-right product of a chain, e.g. multiply_chain({r, xt, wt, w}).
Matrix multiply_chain(std::initializer_list<const Matrix*> factors);

Matrix transpose(const Matrix& a);

double frobenius_norm(const Matrix& a) noexcept;
double squared_frobenius_norm(const Matrix& a) noexcept;
double trace(const Matrix& a);

/// I - a for square a.
Matrix identity_minus(const Matrix& a);

/// Throws NonFiniteError naming `what` if any entry is NaN or Inf.
void require_finite(const Matrix& a, const char* what);

/// a*x for an n-vector x, accumulated in column order.
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
/// a^T*y for an m-vector y, accumulated in row order.
std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> y);

double dot(std::span<const double> a, std::span<const double> b) noexcept;

} // namespace quadinv
