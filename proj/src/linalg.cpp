#include "quadinv/linalg.hpp"

#include <cmath>
#include <vector>

#include "quadinv/error.hpp"

namespace quadinv {

double spectral_norm(const Matrix& a, std::size_t iters, Rng& rng) {
  if (iters == 0) {
    throw PreconditionError("spectral_norm needs at least one iteration");
  }
  std::vector<double> v(a.cols());
  for (double& x : v) {
    x = rng.normal();
  }
  double estimate = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    std::vector<double> w = matvec_transposed(a, matvec(a, v));
    const double norm = std::sqrt(dot(w, w));
    if (norm == 0.0) {
      // v is in the null space of a (or a is zero); the estimate so far stands.
      return estimate;
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = w[j] / norm;
    }
    const std::vector<double> av = matvec(a, v);
    estimate = std::max(estimate, std::sqrt(dot(av, av)));
  }
  return std::min(estimate, frobenius_norm(a));
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(rows, cols);
  for (double& x : g.data()) {
    x = rng.normal();
  }
  return g;
}

QrResult householder_qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) {
    throw DimensionError("householder_qr needs rows >= cols");
  }
  Matrix r = a;
  Matrix q = Matrix::identity(m);
  std::vector<double> v(m);
  // A trailing 1x1 block is already triangular; reflecting it only adds rounding.
  for (std::size_t k = 0; k < n && k + 1 < m; ++k) {
    double norm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) {
      norm2 += r(i, k) * r(i, k);
    }
    if (norm2 == 0.0) {
      continue;
    }
    const double norm = std::sqrt(norm2);
    const double alpha = r(k, k) >= 0.0 ? -norm : norm;
    // v = x - alpha e_1, then H = I - 2 v v^T / (v^T v)
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) {
      v[i] = r(i, k) - (i == k ? alpha : 0.0);
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 == 0.0) {
      continue;
    }
    const double scale = 2.0 / vnorm2;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) {
        s += v[i] * r(i, j);
      }
      s *= scale;
      for (std::size_t i = k; i < m; ++i) {
        r(i, j) -= s * v[i];
      }
    }
    // Q <- Q H
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t l = k; l < m; ++l) {
        s += q(i, l) * v[l];
      }
      s *= scale;
      for (std::size_t l = k; l < m; ++l) {
        q(i, l) -= s * v[l];
      }
    }
    for (std::size_t i = k + 1; i < m; ++i) {
      r(i, k) = 0.0;
    }
  }
  return {std::move(q), std::move(r)};
}

Matrix haar_orthogonal(std::size_t n, Rng& rng) {
  if (n == 0) {
    throw PreconditionError("haar_orthogonal needs n >= 1");
  }
  auto [q, r] = householder_qr(gaussian_matrix(n, n, rng));
  for (std::size_t j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        q(i, j) = -q(i, j);
      }
    }
  }
  return q;
}

double orthogonality_defect(const Matrix& a) {
  return frobenius_norm(identity_minus(matmul(transpose(a), a)));
}

double commutator_norm(const Matrix& a, const Matrix& b) {
  return frobenius_norm(matmul(a, b) - matmul(b, a));
}

} // namespace quadinv
