#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "quadinv/matrix.hpp"
#include "quadinv/rng.hpp"
#include "quadinv/trace.hpp"

namespace quadinv {

// ---------------------------------------------------------------------------
// Step-size laws

struct FixedStep {
  double eta = 0.0;
};
/// gamma = W^T W, applied on the right of the gradient.
struct AdaptiveRight {};
/// Inverse d-th root update for commuting iterates.
struct AdaptiveRoot {
  int d = 1;
};
/// gamma = sum_i coeffs[i] (W^T W)^i.
struct MatrixPolynomial {
  std::vector<double> coeffs;
};

using StepRule = std::variant<FixedStep, AdaptiveRight, AdaptiveRoot, MatrixPolynomial>;

void validate(const StepRule& rule);
std::string_view step_rule_name(const StepRule& rule);

enum class EpochSchedule { cyclic_permutation, iid_uniform };

std::string_view schedule_name(EpochSchedule schedule);

struct SolverConfig {
  StepRule step_rule = AdaptiveRight{};
  double tol_loss = 1e-24;
  std::size_t max_iters = 1000;
  std::size_t max_epochs = 100;
  double divergence_factor = 1e6;
  EpochSchedule schedule = EpochSchedule::cyclic_permutation;
  std::uint64_t seed = 0;
  std::size_t record_every = 1;
  /// Wallclock stamps make traces non-reproducible, so they are opt-in; when
  /// off every record carries wallclock_ns = 0.
  bool record_wallclock = false;

  void validate() const;
};

enum class StopReason { converged, budget_exhausted, diverged, stalled, warm_phase_stalled };

std::string_view stop_reason_name(StopReason reason);

struct SolveResult {
  Matrix w;
  Trace trace;
  StopReason stop = StopReason::budget_exhausted;
  std::size_t iterations = 0;
  std::size_t epochs = 0;
  /// Iteration at which the hybrid driver handed over to the adaptive rule.
  std::optional<std::size_t> switch_iter;
  /// Largest ||W X - X W||_F / (||W||_F ||X||_F) seen by the root driver.
  double max_relative_commutator = 0.0;
};

// ---------------------------------------------------------------------------
// Single steps. All throw NonFiniteError when the result is not finite.

/// W + (I - W X) X^T W^T W, multiplied left to right.
Matrix adaptive_gd_step(const Matrix& w, const Matrix& x);

/// W + (e - W x) x^T W^T W for one column pair, using only matrix-vector
/// products: y = W x, v = W^T y, W + (e - y) v^T.
Matrix adaptive_sgd_step(const Matrix& w, const Matrix& x_col, const Matrix& e_col);

/// W + (1/d) W^(d+1) (I - W^d X) X, evaluated as (I - W^d X) X W^(d+1),
/// which is the same matrix for commuting W and X. Throws CommutatorError when
/// ||W X - X W||_F > 1e-6 ||W||_F ||X||_F and PreconditionError when X is not
/// symmetric.
Matrix root_gd_step(const Matrix& w, const Matrix& x, int d);

/// W + (Y - W X) X^T sum_i c_i (W^T W)^i. Each term is built by multiplying
/// the previous one on the right by W^T then W, so coeffs = {0, 1} reproduces
/// adaptive_gd_step bit for bit.
Matrix polyrate_gd_step(const Matrix& w, const Matrix& x, const Matrix& y, const std::vector<double>& coeffs);

/// Newton-Schulz update 2W - W X W.
Matrix newton_step(const Matrix& w, const Matrix& x);

/// W + eta (I - W X) X^T.
Matrix fixed_gd_step(const Matrix& w, const Matrix& x, double eta);

/// One randomized Kaczmarz sweep per row of W for X^T w = e_j: n projections
/// onto column constraints drawn with probability proportional to ||X_i||^2.
Matrix kaczmarz_sweep(const Matrix& w, const Matrix& x, Rng& rng);

// ---------------------------------------------------------------------------
// Drivers. `reference` (W*, or X^(-1/d) for the root problem) enables err_fro.

/// Loss 1/2 ||I - W X||_F^2.
double inversion_loss(const Matrix& w, const Matrix& x);
/// Loss 1/2 ||I - W^d X||_F^2.
double root_loss(const Matrix& w, const Matrix& x, int d);
/// Loss 1/2 ||Y - W X||_F^2.
double regression_loss(const Matrix& w, const Matrix& x, const Matrix& y);

/// Full-batch GD with a fixed or adaptive-right step rule.
SolveResult solve_inverse_gd(const Matrix& x, const Matrix& w0, const SolverConfig& config,
                             const Matrix* reference = nullptr);

SolveResult solve_newton(const Matrix& x, const Matrix& w0, const SolverConfig& config,
                         const Matrix* reference = nullptr);

/// Repeated Kaczmarz sweeps, one sweep per iteration; draws from config.seed.
SolveResult solve_kaczmarz(const Matrix& x, const Matrix& w0, const SolverConfig& config,
                           const Matrix* reference = nullptr);

/// GD on 1/2 ||Y - W X||^2 with a matrix-polynomial step rule.
SolveResult solve_polyrate(const Matrix& x, const Matrix& y, const Matrix& w0, const SolverConfig& config,
                           const Matrix* reference = nullptr);

/// Adaptive SGD over the columns of X. Every step is recorded (subject to
/// record_every) with its epoch and sample index; the record that closes an
/// epoch is always kept, is at iter = epoch * n and carries the exactly
/// recomputed loss. Convergence and stalls are tested at epoch ends,
/// divergence after every step.
SolveResult solve_inverse_sgd(const Matrix& x, const Matrix& w0, const SolverConfig& config,
                              const Matrix* reference = nullptr);

/// GD for the inverse d-th root of SPD X from a commuting start.
SolveResult solve_inverse_root(const Matrix& x, const Matrix& w0, int d, const SolverConfig& config,
                               const Matrix* reference = nullptr);

enum class WarmMethod { fixed_gd, kaczmarz };

std::string_view warm_method_name(WarmMethod method);

struct WarmStart {
  WarmMethod method = WarmMethod::fixed_gd;
  /// For fixed_gd the step rule must be FixedStep.
  SolverConfig config;
};

/// Linear-rate warm phase (phase label "warm") until loss < switch_loss, then
/// adaptive-right GD (phase "adaptive") down to adaptive.tol_loss.
SolveResult solve_hybrid(const Matrix& x, const Matrix& w0, const WarmStart& warm, const SolverConfig& adaptive,
                         double switch_loss, const Matrix* reference = nullptr);

} // namespace quadinv
