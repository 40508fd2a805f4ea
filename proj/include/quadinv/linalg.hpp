#pragma once

#include <cstddef>

#include "quadinv/matrix.hpp"
#include "quadinv/rng.hpp"

namespace quadinv {

/// Largest singular value of `a`, estimated by power iteration on a^T a from a
/// random start. Never exceeds frobenius_norm(a); returns 0 for a zero matrix.
double spectral_norm(const Matrix& a, std::size_t iters, Rng& rng);

/// rows x cols matrix of i.i.d. standard normal entries drawn row by row.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// Haar-distributed n x n orthogonal matrix: Q from the Householder QR of a
/// Gaussian matrix, with columns flipped so that diag(R) is positive.
Matrix haar_orthogonal(std::size_t n, Rng& rng);

struct QrResult {
  Matrix q; // m x m orthogonal
  Matrix r; // m x n upper triangular
};

/// Householder QR of an m x n matrix (m >= n).
QrResult householder_qr(const Matrix& a);

/// ||a^T a - I||_F, the orthogonality defect of a.
double orthogonality_defect(const Matrix& a);

/// ||a b - b a||_F for square a, b of equal size.
double commutator_norm(const Matrix& a, const Matrix& b);

} // namespace quadinv
