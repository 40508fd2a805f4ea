#include <algorithm>
#include <cmath>
#include <string>

#include "quadinv/error.hpp"
#include "quadinv/linalg.hpp"
#include "quadinv/solvers.hpp"

namespace quadinv {

namespace {

void require_square_pair(const Matrix& w, const Matrix& x, const char* op) {
  if (!x.is_square() || !w.is_square() || w.rows() != x.rows()) {
    throw DimensionError(std::string(op) + ": W and X must be square of equal size");
  }
}

Matrix finite_or_throw(Matrix m, const char* op) {
  require_finite(m, op);
  return m;
}

Matrix power(const Matrix& w, int k) {
  Matrix p = w;
  for (int i = 1; i < k; ++i) {
    p = matmul(p, w);
  }
  return p;
}

} // namespace

void validate(const StepRule& rule) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, FixedStep>) {
          if (!std::isfinite(r.eta) || r.eta <= 0.0) {
            throw PreconditionError("fixed step size must be finite and positive");
          }
        } else if constexpr (std::is_same_v<T, AdaptiveRoot>) {
          if (r.d < 1) {
            throw PreconditionError("root degree d must be at least 1");
          }
        } else if constexpr (std::is_same_v<T, MatrixPolynomial>) {
          if (std::none_of(r.coeffs.begin(), r.coeffs.end(), [](double c) { return c != 0.0; })) {
            throw PreconditionError("matrix-polynomial step needs a nonzero coefficient");
          }
          if (std::any_of(r.coeffs.begin(), r.coeffs.end(), [](double c) { return !std::isfinite(c); })) {
            throw PreconditionError("matrix-polynomial coefficients must be finite");
          }
        }
      },
      rule);
}

std::string_view step_rule_name(const StepRule& rule) {
  struct Namer {
    std::string_view operator()(const FixedStep&) const { return "fixed"; }
    std::string_view operator()(const AdaptiveRight&) const { return "adaptive-right"; }
    std::string_view operator()(const AdaptiveRoot&) const { return "adaptive-root"; }
    std::string_view operator()(const MatrixPolynomial&) const { return "matrix-polynomial"; }
  };
  return std::visit(Namer{}, rule);
}

std::string_view schedule_name(EpochSchedule schedule) {
  return schedule == EpochSchedule::cyclic_permutation ? "cyclic" : "iid";
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
  case StopReason::converged:
    return "converged";
  case StopReason::budget_exhausted:
    return "budget-exhausted";
  case StopReason::diverged:
    return "diverged";
  case StopReason::stalled:
    return "stalled";
  case StopReason::warm_phase_stalled:
    return "warm-phase-stalled";
  }
  return "unknown";
}

std::string_view warm_method_name(WarmMethod method) {
  return method == WarmMethod::fixed_gd ? "fixed-gd" : "kaczmarz";
}

void SolverConfig::validate() const {
  quadinv::validate(step_rule);
  if (!(tol_loss > 0.0)) {
    throw PreconditionError("tol_loss must be positive");
  }
  if (max_iters == 0 || max_epochs == 0 || record_every == 0) {
    throw PreconditionError("iteration, epoch and record budgets must be at least 1");
  }
  if (!(divergence_factor > 1.0)) {
    throw PreconditionError("divergence_factor must exceed 1");
  }
}

Matrix adaptive_gd_step(const Matrix& w, const Matrix& x) {
  require_square_pair(w, x, "adaptive_gd_step");
  const Matrix residual = identity_minus(matmul(w, x));
  const Matrix wt = transpose(w);
  const Matrix xt = transpose(x);
  return finite_or_throw(w + multiply_chain({&residual, &xt, &wt, &w}), "adaptive_gd_step");
}

Matrix adaptive_sgd_step(const Matrix& w, const Matrix& x_col, const Matrix& e_col) {
  const std::size_t n = w.rows();
  if (!w.is_square() || x_col.rows() != n || x_col.cols() != 1 || e_col.rows() != n || e_col.cols() != 1) {
    throw DimensionError("adaptive_sgd_step: W must be n x n and both columns n x 1");
  }
  const std::vector<double> y = matvec(w, x_col.data());
  const std::vector<double> v = matvec_transposed(w, y);
  Matrix out = w;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = e_col(i, 0) - y[i];
    auto row = out.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      row[j] += r * v[j];
    }
  }
  return finite_or_throw(std::move(out), "adaptive_sgd_step");
}

Matrix root_gd_step(const Matrix& w, const Matrix& x, int d) {
  require_square_pair(w, x, "root_gd_step");
  if (d < 1) {
    throw PreconditionError("root_gd_step: d must be at least 1");
  }
  const double xnorm = frobenius_norm(x);
  if (frobenius_norm(x - transpose(x)) > 1e-10 * xnorm) {
    throw PreconditionError("root_gd_step: X must be symmetric positive definite");
  }
  const double commutator = commutator_norm(w, x);
  if (commutator > 1e-6 * frobenius_norm(w) * xnorm) {
    throw CommutatorError("root_gd_step: W does not commute with X (||WX - XW||_F = " + std::to_string(commutator) +
                          ")");
  }
  // For commuting W and X every factor order gives the same update. Rounding
  // leaves non-commuting components, and their growth per step depends on the
  // order: with the residual leftmost they contract whenever the eigenvalues
  // of X are within a factor of about 9 (d = 2), while W^(d+1) leftmost needs
  // a factor below 1.5.
  const Matrix wd = power(w, d);
  const Matrix wd1 = matmul(wd, w);
  const Matrix residual = identity_minus(matmul(wd, x));
  Matrix update = multiply_chain({&residual, &x, &wd1});
  update *= 1.0 / d;
  return finite_or_throw(w + update, "root_gd_step");
}

Matrix polyrate_gd_step(const Matrix& w, const Matrix& x, const Matrix& y, const std::vector<double>& coeffs) {
  if (coeffs.empty()) {
    throw PreconditionError("polyrate_gd_step: coeffs must be non-empty");
  }
  if (w.cols() != x.rows() || y.rows() != w.rows() || y.cols() != x.cols()) {
    throw DimensionError("polyrate_gd_step: need W k x d, X d x n, Y k x n");
  }
  const Matrix wt = transpose(w);
  // gradient direction G = (Y - W X) X^T, then G (W^T W)^i built as G W^T W ... left to right
  Matrix term = matmul(y - matmul(w, x), transpose(x));
  Matrix update(w.rows(), w.cols());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i > 0) {
      term = matmul(matmul(term, wt), w);
    }
    if (coeffs[i] == 1.0) {
      update += term;
    } else if (coeffs[i] != 0.0) {
      update += coeffs[i] * term;
    }
  }
  return finite_or_throw(w + update, "polyrate_gd_step");
}

Matrix newton_step(const Matrix& w, const Matrix& x) {
  require_square_pair(w, x, "newton_step");
  return finite_or_throw(2.0 * w - multiply_chain({&w, &x, &w}), "newton_step");
}

Matrix fixed_gd_step(const Matrix& w, const Matrix& x, double eta) {
  require_square_pair(w, x, "fixed_gd_step");
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw PreconditionError("fixed_gd_step: eta must be finite and positive");
  }
  Matrix update = matmul(identity_minus(matmul(w, x)), transpose(x));
  update *= eta;
  return finite_or_throw(w + update, "fixed_gd_step");
}

Matrix kaczmarz_sweep(const Matrix& w, const Matrix& x, Rng& rng) {
  require_square_pair(w, x, "kaczmarz_sweep");
  const std::size_t n = x.rows();
  std::vector<double> col_norm2(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto r = x.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      col_norm2[i] += r[i] * r[i];
    }
  }
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (col_norm2[i] == 0.0) {
      throw PreconditionError("kaczmarz_sweep: column " + std::to_string(i) + " of X is zero");
    }
    total += col_norm2[i];
    cumulative[i] = total;
  }
  const Matrix xt = transpose(x); // rows of xt are the columns X_i
  Matrix out = w;
  for (std::size_t j = 0; j < n; ++j) {
    auto row = out.row(j);
    for (std::size_t step = 0; step < n; ++step) {
      const double u = rng.uniform() * total;
      const std::size_t i = std::min<std::size_t>(
          static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin()),
          n - 1);
      const auto xi = xt.row(i);
      const double target = (i == j) ? 1.0 : 0.0;
      const double coef = (target - dot(xi, row)) / col_norm2[i];
      for (std::size_t k = 0; k < n; ++k) {
        row[k] += coef * xi[k];
      }
    }
  }
  return finite_or_throw(std::move(out), "kaczmarz_sweep");
}

} // namespace quadinv
