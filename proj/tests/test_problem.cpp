#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "quadinv/error.hpp"
#include "quadinv/linalg.hpp"
#include "quadinv/problem.hpp"

using namespace quadinv;

namespace {

// Top singular values by power iteration on A^T A with explicit deflation.
std::vector<double> top_singular_values(Matrix a, std::size_t count) {
  std::vector<double> out;
  Rng rng(99);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> v(a.cols());
    for (double& x : v) {
      x = rng.normal();
    }
    double sigma = 0.0;
    std::vector<double> u;
    for (int it = 0; it < 3000; ++it) {
      u = matvec(a, v);
      v = matvec_transposed(a, u);
      const double norm = std::sqrt(dot(v, v));
      if (norm == 0.0) {
        break;
      }
      for (double& x : v) {
        x /= norm;
      }
    }
    u = matvec(a, v);
    sigma = std::sqrt(dot(u, u));
    out.push_back(sigma);
    if (sigma == 0.0) {
      break;
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) {
        a(i, j) -= u[i] * v[j];
      }
    }
  }
  return out;
}

std::size_t numerical_rank(const Matrix& a) {
  const std::vector<double> s = top_singular_values(a, std::min(a.rows(), a.cols()));
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double v) { return v > 1e-10 * s[0]; }));
}

RandomMatrixSpec invertible_spec(std::size_t n, std::uint64_t seed) {
  RandomMatrixSpec spec;
  spec.n = n;
  spec.seed = seed;
  return spec;
}

} // namespace

TEST_CASE("gen_invertible 1x1") {
  const InvertibleProblem p = gen_invertible(invertible_spec(1, 3));
  CHECK(std::abs(p.x(0, 0)) == doctest::Approx(p.sigma[0]).epsilon(1e-15));
  CHECK(std::abs(p.w_star(0, 0) * p.x(0, 0) - 1.0) <= 1e-15);
}

TEST_CASE("gen_invertible produces an exact inverse pair") {
  for (std::size_t n : {2, 10, 50, 100}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      RandomMatrixSpec spec = invertible_spec(n, seed);
      spec.condition_cap = 1e4;
      const InvertibleProblem p = gen_invertible(spec);
      CHECK(frobenius_norm(identity_minus(matmul(p.w_star, p.x))) < 1e-10 * static_cast<double>(n));
      CHECK(std::is_sorted(p.sigma.rbegin(), p.sigma.rend()));
      CHECK(p.sigma.front() / p.sigma.back() <= 1e4);
    }
  }
}

TEST_CASE("gen_invertible singular values match a deflation oracle") {
  const InvertibleProblem p = gen_invertible(invertible_spec(50, 17));
  const std::vector<double> top = top_singular_values(p.x, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(top[k] - p.sigma[k]) <= 1e-6);
  }
}

TEST_CASE("gen_invertible is reproducible") {
  const RandomMatrixSpec spec = invertible_spec(20, 77);
  const InvertibleProblem a = gen_invertible(spec);
  const InvertibleProblem b = gen_invertible(spec);
  CHECK(a.x == b.x);
  CHECK(a.w_star == b.w_star);
  CHECK(a.sigma == b.sigma);
}

TEST_CASE("spectrum truncation and caps") {
  RandomMatrixSpec spec = invertible_spec(100, 5);
  spec.sigma_floor = 0.5;
  spec.sigma_ceiling = 2.0;
  const InvertibleProblem p = gen_invertible(spec);
  CHECK(p.sigma.back() >= 0.5);
  CHECK(p.sigma.front() <= 2.0);

  RandomMatrixSpec hopeless = invertible_spec(100, 5);
  hopeless.condition_cap = 1.01;
  hopeless.max_redraws = 5;
  CHECK_THROWS_AS(gen_invertible(hopeless), GenerationError);
}

TEST_CASE("RandomMatrixSpec validation") {
  RandomMatrixSpec spec = invertible_spec(4, 1);
  spec.rank = 2;
  CHECK_THROWS_AS(spec.validate(), PreconditionError);
  spec = invertible_spec(4, 1);
  spec.condition_cap = 1.0;
  CHECK_THROWS_AS(spec.validate(), PreconditionError);
  spec = invertible_spec(4, 1);
  spec.kind = MatrixKind::rank_deficient_target;
  CHECK_THROWS_AS(spec.validate(), PreconditionError);
  spec.rank = 4;
  CHECK_THROWS_AS(gen_rank_deficient(spec), PreconditionError);
}

TEST_CASE("gen_spd") {
  Rng rng(6);
  const SpdProblem p = gen_spd(30, rng, 1e4);
  CHECK(frobenius_norm(p.x - transpose(p.x)) == 0.0);
  const Matrix inv = p.inverse_root(1);
  CHECK(frobenius_norm(identity_minus(matmul(inv, p.x))) <= 1e-10 * 30);
  const Matrix root = p.inverse_root(2);
  CHECK(frobenius_norm(identity_minus(matmul(matmul(root, root), p.x))) <= 1e-10 * 30);

  Rng probe(1);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v(30);
    for (double& x : v) {
      x = probe.normal();
    }
    const double norm = std::sqrt(dot(v, v));
    for (double& x : v) {
      x /= norm;
    }
    CHECK(dot(v, matvec(p.x, v)) > 0.0);
  }

  const SpdProblem four{Matrix{{4}}, Matrix{{1}}, {4.0}};
  CHECK(four.inverse_root(2) == Matrix{{0.5}});
}

TEST_CASE("gen_rank_deficient") {
  RandomMatrixSpec spec;
  spec.n = 4;
  spec.seed = 12;
  spec.kind = MatrixKind::rank_deficient_target;
  spec.rank = 2;
  const RankDeficientProblem p = gen_rank_deficient(spec);
  CHECK(p.w_star.rows() == 4);
  CHECK(p.w_star.cols() == 4);
  CHECK(numerical_rank(p.w_star) == 2);
  CHECK(frobenius_norm(p.y - matmul(p.w_star, p.x)) <= 1e-12 * frobenius_norm(p.y));

  RankDeficientProblem q = p;
  normalize_target(q);
  Rng rng(0);
  CHECK(spectral_norm(q.y, 2000, rng) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(frobenius_norm(q.y - matmul(q.w_star, q.x)) <= 1e-12 * frobenius_norm(q.y));
}

TEST_CASE("make_init") {
  const Matrix x{{2}};
  const Matrix w_star{{0.5}};
  CHECK(make_init(InitScheme::scaled_true_inverse(0.4), {x, &w_star}) == Matrix{{0.2}});
  const Matrix x3 = Matrix::identity(3);
  CHECK(make_init(InitScheme::zero(), {x3}) == Matrix(3, 3));
  CHECK(make_init(InitScheme::scaled_identity(0.7), {x3}) == 0.7 * Matrix::identity(3));
  CHECK_THROWS_AS(make_init(InitScheme::scaled_true_inverse(0.4), {x}), PreconditionError);
  CHECK_THROWS_AS(make_init(InitScheme::commuting_polynomial({2.0}), {x3}), PreconditionError);

  Rng rng(2);
  const SpdProblem p = gen_spd(6, rng, 1e4);
  const Matrix c = make_init(InitScheme::commuting_polynomial({3.0}), {p.x, nullptr, true});
  CHECK(c == 3.0 * Matrix::identity(6));
  const Matrix poly = make_init(InitScheme::commuting_polynomial({1.0, -0.2, 0.01}), {p.x, nullptr, true});
  CHECK(commutator_norm(poly, p.x) <= 1e-12 * frobenius_norm(poly) * frobenius_norm(p.x));
}

TEST_CASE("reduce_target") {
  Rng rng(7);
  const Matrix x = gaussian_matrix(4, 4, rng);
  CHECK(reduce_target(x, Matrix::identity(4)) == x);
  CHECK(reduce_target(Matrix{{2}}, Matrix{{-1}}) == Matrix{{-2}});
  CHECK_THROWS_AS(reduce_target(Matrix{{2}}, Matrix{{2}}), PreconditionError);

  // Solving W (X Y^T) = I gives W X = Y.
  const Matrix y = haar_orthogonal(4, rng);
  const Matrix reduced = reduce_target(x, y);
  // Inverse of X Y^T is Y X^-1; X^-1 comes from the generator.
  const InvertibleProblem p = gen_invertible(invertible_spec(4, 8));
  const Matrix w = matmul(y, p.w_star);
  CHECK(frobenius_norm(matmul(w, p.x) - y) <= 1e-10);
  CHECK(frobenius_norm(identity_minus(matmul(w, reduce_target(p.x, y)))) <= 1e-10);
  (void)reduced;
}

TEST_CASE("matrix_polynomial") {
  const Matrix b{{1, 1}, {0, 1}};
  CHECK(matrix_polynomial(b, {2.0}) == 2.0 * Matrix::identity(2));
  CHECK(matrix_polynomial(b, {0.0, 0.0, 1.0}) == Matrix{{1, 2}, {0, 1}});
}
