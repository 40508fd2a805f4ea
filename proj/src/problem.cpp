#include "quadinv/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "quadinv/error.hpp"
#include "quadinv/linalg.hpp"

namespace quadinv {

namespace {

struct SpectrumLaw {
  std::optional<double> cap;
  std::optional<double> floor;
  std::optional<double> ceiling;
  std::size_t max_redraws = 1000;
};

std::vector<double> draw_spectrum(std::size_t n, Rng& rng, const SpectrumLaw& law) {
  const auto& [cap, floor, ceiling, max_redraws] = law;
  auto admissible = [&](double v) { return (!floor || v >= *floor) && (!ceiling || v <= *ceiling); };
  std::vector<double> s(n);
  for (std::size_t attempt = 0; attempt <= max_redraws; ++attempt) {
    for (double& v : s) {
      v = std::abs(rng.normal());
      std::size_t tries = 0;
      while (!admissible(v)) {
        if (++tries > max_redraws) {
          throw GenerationError("spectrum bounds unattainable");
        }
        v = std::abs(rng.normal());
      }
    }
    std::sort(s.begin(), s.end(), std::greater<>());
    if (s.back() > 0.0 && (!cap || s.front() / s.back() <= *cap)) {
      return s;
    }
  }
  throw GenerationError("condition cap " + std::to_string(cap.value_or(0.0)) + " not met after " +
                        std::to_string(max_redraws) + " redraws");
}

// a * diag(d) * b^T
Matrix scaled_outer(const Matrix& a, std::span<const double> d, const Matrix& b) {
  Matrix ad = a;
  for (std::size_t i = 0; i < ad.rows(); ++i) {
    for (std::size_t j = 0; j < ad.cols(); ++j) {
      ad(i, j) *= d[j];
    }
  }
  return matmul(ad, transpose(b));
}

Matrix symmetrized(const Matrix& a) {
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
  }
  return s;
}

} // namespace

void RandomMatrixSpec::validate() const {
  if (n == 0) {
    throw PreconditionError("RandomMatrixSpec: n must be positive");
  }
  if (rank.has_value() != (kind == MatrixKind::rank_deficient_target)) {
    throw PreconditionError("RandomMatrixSpec: rank is required for, and only for, rank-deficient targets");
  }
  if (rank && (*rank == 0 || *rank >= n)) {
    throw PreconditionError("RandomMatrixSpec: rank must lie in [1, d), got " + std::to_string(*rank) +
                            " with d=" + std::to_string(n));
  }
  if (condition_cap && !(*condition_cap > 1.0)) {
    throw PreconditionError("RandomMatrixSpec: condition_cap must exceed 1");
  }
  if (sigma_floor && !(*sigma_floor >= 0.0 && *sigma_floor < 4.0)) {
    throw PreconditionError("RandomMatrixSpec: sigma_floor must lie in [0, 4)");
  }
  if (sigma_ceiling && !(*sigma_ceiling > sigma_floor.value_or(0.0))) {
    throw PreconditionError("RandomMatrixSpec: sigma_ceiling must exceed sigma_floor and 0");
  }
  if ((targets && *targets == 0) || (samples && *samples < n)) {
    throw PreconditionError("RandomMatrixSpec: targets must be positive and samples >= d");
  }
}

Matrix SpdProblem::inverse_root(int d) const {
  if (d < 1) {
    throw PreconditionError("inverse_root needs d >= 1");
  }
  std::vector<double> scaled(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    scaled[i] = std::pow(lambda[i], -1.0 / d);
  }
  return symmetrized(scaled_outer(q, scaled, q));
}

InvertibleProblem gen_invertible(const RandomMatrixSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.kind != MatrixKind::general_invertible) {
    throw PreconditionError("gen_invertible: spec kind must be general-invertible");
  }
  std::vector<double> sigma =
      draw_spectrum(spec.n, rng, {spec.condition_cap, spec.sigma_floor, spec.sigma_ceiling, spec.max_redraws});
  const Matrix u = haar_orthogonal(spec.n, rng);
  const Matrix v = haar_orthogonal(spec.n, rng);
  std::vector<double> inv(sigma.size());
  std::transform(sigma.begin(), sigma.end(), inv.begin(), [](double s) { return 1.0 / s; });
  Matrix x = scaled_outer(u, sigma, v);
  Matrix w_star = scaled_outer(v, inv, u);
  return {std::move(x), std::move(w_star), std::move(sigma)};
}

InvertibleProblem gen_invertible(const RandomMatrixSpec& spec) {
  Rng rng(spec.seed);
  return gen_invertible(spec, rng);
}

SpdProblem gen_spd(std::size_t n, Rng& rng, std::optional<double> condition_cap, std::optional<double> sigma_floor,
                   std::optional<double> sigma_ceiling, std::size_t max_redraws) {
  RandomMatrixSpec spec{.n = n,
                        .kind = MatrixKind::spd,
                        .condition_cap = condition_cap,
                        .sigma_floor = sigma_floor,
                        .sigma_ceiling = sigma_ceiling};
  spec.validate();
  std::vector<double> lambda = draw_spectrum(n, rng, {condition_cap, sigma_floor, sigma_ceiling, max_redraws});
  Matrix q = haar_orthogonal(n, rng);
  Matrix x = symmetrized(scaled_outer(q, lambda, q));
  return {std::move(x), std::move(q), std::move(lambda)};
}

SpdProblem gen_spd(const RandomMatrixSpec& spec) {
  if (spec.kind != MatrixKind::spd) {
    throw PreconditionError("gen_spd: spec kind must be spd");
  }
  Rng rng(spec.seed);
  return gen_spd(spec.n, rng, spec.condition_cap, spec.sigma_floor, spec.sigma_ceiling, spec.max_redraws);
}

RankDeficientProblem gen_rank_deficient(const RandomMatrixSpec& spec, Rng& rng) {
  if (spec.kind != MatrixKind::rank_deficient_target) {
    throw PreconditionError("gen_rank_deficient: spec kind must be rank-deficient-target");
  }
  spec.validate();
  const std::size_t d = spec.n;
  const std::size_t k = spec.targets.value_or(d);
  const std::size_t samples = spec.samples.value_or(d);
  const std::size_t r = *spec.rank;
  const Matrix a = gaussian_matrix(k, r, rng);
  const Matrix b = gaussian_matrix(r, d, rng);
  Matrix x = gaussian_matrix(d, samples, rng);
  Matrix w_star = matmul(a, b);
  Matrix y = matmul(w_star, x);
  return {std::move(x), std::move(y), std::move(w_star)};
}

RankDeficientProblem gen_rank_deficient(const RandomMatrixSpec& spec) {
  Rng rng(spec.seed);
  return gen_rank_deficient(spec, rng);
}

void normalize_target(RankDeficientProblem& problem) {
  Rng probe(0);
  const double norm = spectral_norm(problem.y, 2000, probe);
  if (norm == 0.0) {
    throw PreconditionError("normalize_target: target is zero");
  }
  problem.y *= 1.0 / norm;
  problem.w_star *= 1.0 / norm;
}

Matrix matrix_polynomial(const Matrix& base, const std::vector<double>& coeffs) {
  if (!base.is_square()) {
    throw DimensionError("matrix_polynomial needs a square base");
  }
  Matrix sum(base.rows(), base.cols());
  Matrix power = Matrix::identity(base.rows());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i > 0) {
      power = matmul(power, base);
    }
    if (coeffs[i] != 0.0) {
      sum += coeffs[i] * power;
    }
  }
  return sum;
}

Matrix make_init(const InitScheme& scheme, const InitContext& context) {
  const Matrix& x = context.x;
  switch (scheme.kind) {
  case InitKind::scaled_true_inverse:
    if (context.ground_truth == nullptr) {
      throw PreconditionError("scaled-true-inverse init needs the generator's ground truth");
    }
    return scheme.scale * *context.ground_truth;
  case InitKind::zero:
    if (context.ground_truth != nullptr) {
      return Matrix::zeros(context.ground_truth->rows(), context.ground_truth->cols());
    }
    return Matrix::zeros(x.cols(), x.rows());
  case InitKind::scaled_identity:
    if (!x.is_square()) {
      throw PreconditionError("scaled-identity init needs a square problem");
    }
    return scheme.scale * Matrix::identity(x.rows());
  case InitKind::commuting_polynomial:
    if (!context.spd_root) {
      throw PreconditionError("commuting-polynomial init applies only to the SPD root problem");
    }
    if (scheme.coeffs.empty()) {
      throw PreconditionError("commuting-polynomial init needs coefficients");
    }
    return matrix_polynomial(x, scheme.coeffs);
  }
  throw PreconditionError("unknown init scheme");
}

Matrix reduce_target(const Matrix& x, const Matrix& y) {
  if (!y.is_square() || y.rows() != x.cols()) {
    throw DimensionError("reduce_target: Y must be square with size matching X's columns");
  }
  if (orthogonality_defect(y) > 1e-8 * static_cast<double>(y.rows())) {
    throw PreconditionError("reduce_target: Y is not orthogonal");
  }
  return matmul(x, transpose(y));
}

} // namespace quadinv
