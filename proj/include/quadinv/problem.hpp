#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "quadinv/matrix.hpp"
#include "quadinv/rng.hpp"

namespace quadinv {

enum class MatrixKind { general_invertible, spd, rank_deficient_target };

/// Describes one random test problem.
///
/// Spectra are |N(0,1)| draws. With `condition_cap` the whole draw is redone
/// until max/min <= cap; with `sigma_floor` / `sigma_ceiling` each value is
/// redrawn until it lies in [floor, ceiling] (a truncated half-normal law, used
/// for well-conditioned problems). The rank-deficient kind builds a k x d target of rank `rank`
/// from d x n data, with d = n and k = targets (default n), n = samples
/// (default d).
struct RandomMatrixSpec {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  MatrixKind kind = MatrixKind::general_invertible;
  std::optional<std::size_t> rank;
  std::optional<double> condition_cap;
  std::optional<double> sigma_floor;
  std::optional<double> sigma_ceiling;
  std::optional<std::size_t> targets;
  std::optional<std::size_t> samples;
  std::size_t max_redraws = 1000;

  void validate() const;
};

struct InvertibleProblem {
  Matrix x;
  Matrix w_star;
  std::vector<double> sigma; // descending
};

struct SpdProblem {
  Matrix x;
  Matrix q;                    // eigenvectors
  std::vector<double> lambda;  // descending eigenvalues

  /// Q diag(lambda^(-1/d)) Q^T, symmetric by construction.
  Matrix inverse_root(int d) const;
};

struct RankDeficientProblem {
  Matrix x;      // d x n
  Matrix y;      // k x n
  Matrix w_star; // k x d, rank < d
};

/// X = U diag(sigma) V^T with Haar U, V, and W* = V diag(1/sigma) U^T.
InvertibleProblem gen_invertible(const RandomMatrixSpec& spec, Rng& rng);
InvertibleProblem gen_invertible(const RandomMatrixSpec& spec);

/// X = Q diag(lambda) Q^T, exactly symmetric.
SpdProblem gen_spd(std::size_t n, Rng& rng, std::optional<double> condition_cap = std::nullopt,
                   std::optional<double> sigma_floor = std::nullopt, std::optional<double> sigma_ceiling = std::nullopt,
                   std::size_t max_redraws = 1000);
SpdProblem gen_spd(const RandomMatrixSpec& spec);

/// W* = A B with Gaussian A (k x r), B (r x d); Gaussian X (d x n); Y = W* X.
RankDeficientProblem gen_rank_deficient(const RandomMatrixSpec& spec, Rng& rng);
RankDeficientProblem gen_rank_deficient(const RandomMatrixSpec& spec);

/// Rescales W* and Y by 1/||Y||_2. The nonzero eigenvalues of X X^T W*^T W*
/// are the squared singular values of Y, so afterwards they lie in (0, 1] and
/// unit-coefficient polynomial step sizes stay stable.
void normalize_target(RankDeficientProblem& problem);

enum class InitKind { scaled_true_inverse, zero, scaled_identity, commuting_polynomial };

struct InitScheme {
  InitKind kind = InitKind::zero;
  double scale = 0.0;              // c for the scaled schemes
  std::vector<double> coeffs;      // commuting-polynomial coefficients, lowest degree first

  static InitScheme scaled_true_inverse(double c) { return {InitKind::scaled_true_inverse, c, {}}; }
  static InitScheme zero() { return {InitKind::zero, 0.0, {}}; }
  static InitScheme scaled_identity(double c) { return {InitKind::scaled_identity, c, {}}; }
  static InitScheme commuting_polynomial(std::vector<double> c) {
    return {InitKind::commuting_polynomial, 0.0, std::move(c)};
  }
};

/// What make_init may look at. `ground_truth` is W* (or X^(-1/d) for the
/// root problem); `spd_root` marks the inverse-root problem.
struct InitContext {
  const Matrix& x;
  const Matrix* ground_truth = nullptr;
  bool spd_root = false;
};

Matrix make_init(const InitScheme& scheme, const InitContext& context);

/// Returns X Y^T for orthogonal Y. If W solves W (X Y^T) = I then W X = Y,
/// because right-multiplying by Y cancels Y^T Y = I.
Matrix reduce_target(const Matrix& x, const Matrix& y);

/// Sum_i coeffs[i] * base^i with base^0 = I, powers accumulated left to right.
Matrix matrix_polynomial(const Matrix& base, const std::vector<double>& coeffs);

} // namespace quadinv
