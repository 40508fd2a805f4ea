#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "quadinv/matrix.hpp"
#include "quadinv/trace.hpp"

namespace quadinv {

/// Error band used when fitting the convergence order. The upper bound drops
/// the pre-asymptotic regime, the lower bound the double-precision floor.
struct OrderWindow {
  double hi = 1e-2;
  double lo = 1e-13;
};

/// Fit of log e[t+1] = order * log e[t] + intercept over consecutive pairs
/// that both lie inside the window.
struct OrderEstimate {
  double order = 0.0;
  double intercept = 0.0;  // log C
  std::size_t points_used = 0; // distinct in-window errors touched by the fit
  std::size_t pairs_used = 0;
  double fit_residual = 0.0;   // RMS residual of the fit in log space
  OrderWindow window;
  bool sufficient = false;     // at least 3 points (2 pairs) with spread in e[t]
};

/// Throws PreconditionError for negative or non-finite errors or a bad window.
/// Zero errors are legal and simply fall outside every window.
OrderEstimate estimate_order(std::span<const double> errs, OrderWindow window = {});

/// Window retried by estimate_order_auto when the default one is too narrow.
inline constexpr OrderWindow kWideOrderWindow{1e-1, 1e-13};

/// estimate_order with the default window, retried with kWideOrderWindow when
/// the default yields insufficient data (fast methods can jump from above 1e-2
/// to the float floor in three steps). The window used is in the result.
OrderEstimate estimate_order_auto(std::span<const double> errs);

/// Error sequence whose order the summaries and acceptance checks report.
///
/// SGD traces (records carrying an epoch) are reduced to their epoch-end
/// records, phase-labelled traces to their final phase. The error is err_fro
/// when every record has it, else the residual norm sqrt(2 * loss). Values are
/// divided by the error of the trace's first record, so the window applies to
/// the error reduction relative to the starting point.
std::vector<double> order_series(const Trace& trace);

/// Records closing an epoch (the last record of each epoch >= 1), preceded by
/// the initial record.
std::vector<TraceRecord> epoch_end_records(const Trace& trace);

/// Left-to-right product over `ordering` of (I - X_i X_i^T W*^T W*).
/// Requires ||W* X - I||_F <= 1e-8 n and `ordering` a permutation of 0..n-1.
Matrix prop2_product(const Matrix& x, const Matrix& w_star, std::span<const std::size_t> ordering);

/// (X_i X_i^T W*^T W*) (X_j X_j^T W*^T W*); zero for i != j when W* X = I.
Matrix prop2_cross_term(const Matrix& x, const Matrix& w_star, std::size_t i, std::size_t j);

/// I_d - X X^T sum_i coeffs[i] (W*^T W*)^i: the coefficient of the part of the
/// next error that is linear in the current error under a polynomial step.
Matrix thm3_constant_term(const Matrix& w_star, const Matrix& x, const std::vector<double>& coeffs);

struct SpectrumInfo {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  std::size_t n = 0;

  void validate() const;
};

/// sigma_max^4 e^6 + n sigma_max^4 sigma_min^-2 e^4, the commonly quoted
/// one-step bound on the squared error of adaptive GD. It is not a valid bound
/// in general: x = 2, e = 0.1 gives 4.16e-4 against an actual 1.296e-3.
double local_step_bound(double err, const SpectrumInfo& spectrum);

/// Bound that follows from U' = -U X X^T (U^T U + W*^T U + U^T W*):
/// ||U'||^2 <= sigma_max^4 (e^3 + 2 ||W*||_F e^2)^2.
double rigorous_step_bound(double err, double w_star_norm, const SpectrumInfo& spectrum);

/// True iff err_next^2 <= local_step_bound(err) + 1e-12. Throws
/// PreconditionError when either record lacks err_fro.
bool verify_local_bound(const TraceRecord& current, const TraceRecord& next, const SpectrumInfo& spectrum);

} // namespace quadinv
