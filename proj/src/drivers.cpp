#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "quadinv/error.hpp"
#include "quadinv/linalg.hpp"
#include "quadinv/solvers.hpp"

namespace quadinv {

namespace {

using Clock = std::chrono::steady_clock;

struct Stamp {
  bool enabled;
  Clock::time_point start = Clock::now();
  std::uint64_t now() const {
    if (!enabled) {
      return 0;
    }
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
  }
};

std::optional<double> error_against(const Matrix& w, const Matrix* reference) {
  if (reference == nullptr) {
    return std::nullopt;
  }
  return frobenius_norm(w - *reference);
}

// Full-batch loop shared by every deterministic-step driver.
struct Loop {
  std::function<Matrix(const Matrix&)> step;
  std::function<double(const Matrix&)> loss;
  // Returns true once the iterate has reached the phase's goal.
  std::function<bool(double)> done;
  const Matrix* reference = nullptr;
  std::optional<std::string> phase;
  std::size_t max_iters = 0;
  double divergence_factor = 1e6;
  std::size_t record_every = 1;
};

struct LoopOutcome {
  StopReason stop;
  std::size_t iterations; // steps taken in this loop
};

// Runs from `w` (updated in place). The record for the starting point is
// written unless `skip_initial_record` (the hybrid's second phase continues an
// existing trace). `iter_offset` shifts the iteration counter.
LoopOutcome run_loop(const Loop& loop, Matrix& w, Trace& trace, std::size_t iter_offset, const Stamp& stamp,
                     bool skip_initial_record, StopReason goal_reason) {
  auto record = [&](std::size_t iter, double loss) {
    trace.append({.iter = iter,
                  .phase = loop.phase,
                  .loss = loss,
                  .err_fro = error_against(w, loop.reference),
                  .wallclock_ns = stamp.now()});
  };
  double loss = loop.loss(w);
  const double initial_loss = loss;
  if (!skip_initial_record) {
    record(iter_offset, loss);
  }
  if (loop.done(loss)) {
    return {goal_reason, 0};
  }
  for (std::size_t k = 1; k <= loop.max_iters; ++k) {
    Matrix next(1, 1);
    try {
      next = loop.step(w);
      loss = loop.loss(next);
    } catch (const NonFiniteError&) {
      return {StopReason::diverged, k - 1};
    }
    const bool unchanged = next == w;
    w = std::move(next);
    const bool diverged = !std::isfinite(loss) || loss > loop.divergence_factor * initial_loss;
    const bool reached = !diverged && loop.done(loss);
    const bool last = diverged || reached || unchanged || k == loop.max_iters;
    if (last || k % loop.record_every == 0) {
      record(iter_offset + k, std::isfinite(loss) ? loss : 0.0);
    }
    if (diverged) {
      return {StopReason::diverged, k};
    }
    if (reached) {
      return {goal_reason, k};
    }
    if (unchanged) {
      return {StopReason::stalled, k};
    }
  }
  return {StopReason::budget_exhausted, loop.max_iters};
}

SolveResult run_simple(const Matrix& w0, const SolverConfig& config, const Matrix* reference,
                       std::function<Matrix(const Matrix&)> step, std::function<double(const Matrix&)> loss) {
  config.validate();
  const double tol = config.tol_loss;
  Loop loop{.step = std::move(step),
            .loss = std::move(loss),
            .done = [tol](double l) { return l <= tol; },
            .reference = reference,
            .max_iters = config.max_iters,
            .divergence_factor = config.divergence_factor,
            .record_every = config.record_every};
  SolveResult result{.w = w0};
  const Stamp stamp{config.record_wallclock};
  const auto outcome = run_loop(loop, result.w, result.trace, 0, stamp, false, StopReason::converged);
  result.stop = outcome.stop;
  result.iterations = outcome.iterations;
  return result;
}

void require_square_problem(const Matrix& x, const Matrix& w0, const char* who) {
  if (!x.is_square() || !w0.is_square() || x.rows() != w0.rows()) {
    throw DimensionError(std::string(who) + ": X and W0 must be square of equal size");
  }
}

} // namespace

double inversion_loss(const Matrix& w, const Matrix& x) {
  return 0.5 * squared_frobenius_norm(identity_minus(matmul(w, x)));
}

double root_loss(const Matrix& w, const Matrix& x, int d) {
  Matrix p = w;
  for (int i = 1; i < d; ++i) {
    p = matmul(p, w);
  }
  return 0.5 * squared_frobenius_norm(identity_minus(matmul(p, x)));
}

double regression_loss(const Matrix& w, const Matrix& x, const Matrix& y) {
  return 0.5 * squared_frobenius_norm(y - matmul(w, x));
}

SolveResult solve_inverse_gd(const Matrix& x, const Matrix& w0, const SolverConfig& config, const Matrix* reference) {
  require_square_problem(x, w0, "solve_inverse_gd");
  auto loss = [&x](const Matrix& w) { return inversion_loss(w, x); };
  if (const auto* fixed = std::get_if<FixedStep>(&config.step_rule)) {
    const double eta = fixed->eta;
    return run_simple(w0, config, reference, [&x, eta](const Matrix& w) { return fixed_gd_step(w, x, eta); }, loss);
  }
  if (std::holds_alternative<AdaptiveRight>(config.step_rule)) {
    return run_simple(w0, config, reference, [&x](const Matrix& w) { return adaptive_gd_step(w, x); }, loss);
  }
  throw PreconditionError("solve_inverse_gd: step rule must be fixed or adaptive-right");
}

SolveResult solve_newton(const Matrix& x, const Matrix& w0, const SolverConfig& config, const Matrix* reference) {
  require_square_problem(x, w0, "solve_newton");
  return run_simple(
      w0, config, reference, [&x](const Matrix& w) { return newton_step(w, x); },
      [&x](const Matrix& w) { return inversion_loss(w, x); });
}

SolveResult solve_kaczmarz(const Matrix& x, const Matrix& w0, const SolverConfig& config, const Matrix* reference) {
  require_square_problem(x, w0, "solve_kaczmarz");
  auto rng = std::make_shared<Rng>(config.seed);
  return run_simple(
      w0, config, reference, [&x, rng](const Matrix& w) { return kaczmarz_sweep(w, x, *rng); },
      [&x](const Matrix& w) { return inversion_loss(w, x); });
}

SolveResult solve_polyrate(const Matrix& x, const Matrix& y, const Matrix& w0, const SolverConfig& config,
                           const Matrix* reference) {
  const auto* poly = std::get_if<MatrixPolynomial>(&config.step_rule);
  if (poly == nullptr) {
    throw PreconditionError("solve_polyrate: step rule must be matrix-polynomial");
  }
  if (w0.cols() != x.rows() || y.rows() != w0.rows() || y.cols() != x.cols()) {
    throw DimensionError("solve_polyrate: need W0 k x d, X d x n, Y k x n");
  }
  const std::vector<double> coeffs = poly->coeffs;
  return run_simple(
      w0, config, reference, [&x, &y, coeffs](const Matrix& w) { return polyrate_gd_step(w, x, y, coeffs); },
      [&x, &y](const Matrix& w) { return regression_loss(w, x, y); });
}

SolveResult solve_inverse_root(const Matrix& x, const Matrix& w0, int d, const SolverConfig& config,
                               const Matrix* reference) {
  require_square_problem(x, w0, "solve_inverse_root");
  if (const auto* root = std::get_if<AdaptiveRoot>(&config.step_rule); root == nullptr || root->d != d) {
    throw PreconditionError("solve_inverse_root: step rule must be adaptive-root with the same d");
  }
  auto max_commutator = std::make_shared<double>(0.0);
  const double xnorm = frobenius_norm(x);
  auto track = [max_commutator, xnorm, &x](const Matrix& w) {
    const double wnorm = frobenius_norm(w);
    if (wnorm > 0.0) {
      *max_commutator = std::max(*max_commutator, commutator_norm(w, x) / (wnorm * xnorm));
    }
  };
  track(w0);
  SolveResult result = run_simple(
      w0, config, reference,
      [&x, d, track](const Matrix& w) {
        Matrix next = root_gd_step(w, x, d);
        track(next);
        return next;
      },
      [&x, d](const Matrix& w) { return root_loss(w, x, d); });
  result.max_relative_commutator = *max_commutator;
  return result;
}

SolveResult solve_inverse_sgd(const Matrix& x, const Matrix& w0, const SolverConfig& config,
                              const Matrix* reference) {
  config.validate();
  require_square_problem(x, w0, "solve_inverse_sgd");
  if (!std::holds_alternative<AdaptiveRight>(config.step_rule)) {
    throw PreconditionError("solve_inverse_sgd: step rule must be adaptive-right");
  }
  const std::size_t n = x.rows();
  const Matrix xt = transpose(x); // row i is the column X_i
  Rng rng(config.seed);
  const Stamp stamp{config.record_wallclock};

  SolveResult result{.w = w0};
  Matrix& w = result.w;
  // residual R = I - W X is updated incrementally within an epoch and
  // recomputed exactly at every epoch end
  Matrix residual = identity_minus(matmul(w, x));
  double loss = 0.5 * squared_frobenius_norm(residual);
  const double initial_loss = loss;
  auto record = [&](std::size_t iter, std::optional<std::uint64_t> epoch, std::optional<std::uint64_t> sample,
                    double l) {
    result.trace.append({.iter = iter,
                         .epoch = epoch,
                         .sample_index = sample,
                         .loss = l,
                         .err_fro = error_against(w, reference),
                         .wallclock_ns = stamp.now()});
  };
  record(0, 0, std::nullopt, loss);
  if (loss <= config.tol_loss) {
    result.stop = StopReason::converged;
    return result;
  }

  std::size_t iter = 0;
  std::vector<std::size_t> order(n);
  std::vector<double> y(n), v(n), vx(n), r(n);
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.schedule == EpochSchedule::cyclic_permutation) {
      order = rng.permutation(n);
    } else {
      for (auto& i : order) {
        i = rng.index(n);
      }
    }
    const Matrix epoch_start = w;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t i = order[pos];
      ++iter;
      // y = W X_i, r = e_i - y, v = W^T y; W += r v^T; R -= r (v^T X)
      y = matvec(w, xt.row(i));
      v = matvec_transposed(w, y);
      for (std::size_t a = 0; a < n; ++a) {
        r[a] = (a == i ? 1.0 : 0.0) - y[a];
      }
      for (std::size_t a = 0; a < n; ++a) {
        auto row = w.row(a);
        for (std::size_t b = 0; b < n; ++b) {
          row[b] += r[a] * v[b];
        }
      }
      vx = matvec_transposed(x, v);
      for (std::size_t a = 0; a < n; ++a) {
        auto row = residual.row(a);
        for (std::size_t b = 0; b < n; ++b) {
          row[b] -= r[a] * vx[b];
        }
      }
      const bool epoch_end = pos + 1 == n;
      bool finite = true;
      for (double value : w.data()) {
        finite = finite && std::isfinite(value);
      }
      if (finite && epoch_end) {
        residual = identity_minus(matmul(w, x));
      }
      loss = finite ? 0.5 * squared_frobenius_norm(residual) : INFINITY;
      if (!std::isfinite(loss) || loss > config.divergence_factor * initial_loss) {
        if (finite) {
          record(iter, epoch, i, loss);
        }
        result.stop = StopReason::diverged;
        result.iterations = iter;
        result.epochs = epoch;
        if (!finite) {
          result.w = epoch_start;
        }
        return result;
      }
      if (epoch_end || iter % config.record_every == 0) {
        record(iter, epoch, i, loss);
      }
    }
    result.iterations = iter;
    result.epochs = epoch;
    if (loss <= config.tol_loss) {
      result.stop = StopReason::converged;
      return result;
    }
    if (w == epoch_start) {
      result.stop = StopReason::stalled;
      return result;
    }
  }
  result.stop = StopReason::budget_exhausted;
  return result;
}

SolveResult solve_hybrid(const Matrix& x, const Matrix& w0, const WarmStart& warm, const SolverConfig& adaptive,
                         double switch_loss, const Matrix* reference) {
  require_square_problem(x, w0, "solve_hybrid");
  warm.config.validate();
  adaptive.validate();
  if (!(switch_loss > adaptive.tol_loss)) {
    throw PreconditionError("solve_hybrid: switch_loss must exceed the adaptive tol_loss");
  }
  if (!std::holds_alternative<AdaptiveRight>(adaptive.step_rule)) {
    throw PreconditionError("solve_hybrid: second phase must use the adaptive-right rule");
  }
  auto loss = [&x](const Matrix& w) { return inversion_loss(w, x); };
  std::function<Matrix(const Matrix&)> warm_step;
  if (warm.method == WarmMethod::fixed_gd) {
    const auto* fixed = std::get_if<FixedStep>(&warm.config.step_rule);
    if (fixed == nullptr) {
      throw PreconditionError("solve_hybrid: fixed-gd warm start needs a fixed step rule");
    }
    const double eta = fixed->eta;
    warm_step = [&x, eta](const Matrix& w) { return fixed_gd_step(w, x, eta); };
  } else {
    auto rng = std::make_shared<Rng>(warm.config.seed);
    warm_step = [&x, rng](const Matrix& w) { return kaczmarz_sweep(w, x, *rng); };
  }

  SolveResult result{.w = w0};
  const Stamp stamp{warm.config.record_wallclock || adaptive.record_wallclock};
  Loop warm_loop{.step = warm_step,
                 .loss = loss,
                 .done = [switch_loss](double l) { return l < switch_loss; },
                 .reference = reference,
                 .phase = "warm",
                 .max_iters = warm.config.max_iters,
                 .divergence_factor = warm.config.divergence_factor,
                 .record_every = warm.config.record_every};
  const auto first = run_loop(warm_loop, result.w, result.trace, 0, stamp, false, StopReason::converged);
  result.iterations = first.iterations;
  if (first.stop != StopReason::converged) {
    result.stop = first.stop == StopReason::diverged ? StopReason::diverged : StopReason::warm_phase_stalled;
    return result;
  }
  result.switch_iter = first.iterations;

  const double tol = adaptive.tol_loss;
  Loop adaptive_loop{.step = [&x](const Matrix& w) { return adaptive_gd_step(w, x); },
                     .loss = loss,
                     .done = [tol](double l) { return l <= tol; },
                     .reference = reference,
                     .phase = "adaptive",
                     .max_iters = adaptive.max_iters,
                     .divergence_factor = adaptive.divergence_factor,
                     .record_every = adaptive.record_every};
  const auto second =
      run_loop(adaptive_loop, result.w, result.trace, first.iterations, stamp, true, StopReason::converged);
  result.iterations += second.iterations;
  result.stop = second.stop;
  return result;
}

} // namespace quadinv
