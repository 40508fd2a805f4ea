#include "quadinv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "quadinv/error.hpp"
#include "quadinv/problem.hpp"

namespace quadinv {

OrderEstimate estimate_order(std::span<const double> errs, OrderWindow window) {
  if (!(window.hi > window.lo && window.lo > 0.0)) {
    throw PreconditionError("estimate_order: window must satisfy hi > lo > 0");
  }
  for (double e : errs) {
    if (!std::isfinite(e) || e < 0.0) {
      throw PreconditionError("estimate_order: errors must be finite and non-negative");
    }
  }
  auto inside = [&](double e) { return e > 0.0 && e >= window.lo && e <= window.hi; };
  std::vector<double> xs;
  std::vector<double> ys;
  std::set<std::size_t> points;
  for (std::size_t t = 0; t + 1 < errs.size(); ++t) {
    if (inside(errs[t]) && inside(errs[t + 1])) {
      xs.push_back(std::log(errs[t]));
      ys.push_back(std::log(errs[t + 1]));
      points.insert(t);
      points.insert(t + 1);
    }
  }
  OrderEstimate est;
  est.window = window;
  est.pairs_used = xs.size();
  est.points_used = points.size();
  if (xs.size() < 2 || points.size() < 3) {
    return est;
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0.0) {
    return est;
  }
  est.order = sxy / sxx;
  est.intercept = my - est.order * mx;
  double ss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (est.order * xs[k] + est.intercept);
    ss += r * r;
  }
  est.fit_residual = std::sqrt(ss / m);
  est.sufficient = true;
  return est;
}

OrderEstimate estimate_order_auto(std::span<const double> errs) {
  OrderEstimate est = estimate_order(errs);
  if (!est.sufficient) {
    OrderEstimate wide = estimate_order(errs, kWideOrderWindow);
    if (wide.sufficient) {
      return wide;
    }
  }
  return est;
}

std::vector<TraceRecord> epoch_end_records(const Trace& trace) {
  std::vector<TraceRecord> out;
  const auto& recs = trace.records();
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const bool initial = k == 0;
    const bool closes = recs[k].epoch && *recs[k].epoch >= 1 &&
                        (k + 1 == recs.size() || recs[k + 1].epoch != recs[k].epoch);
    if (initial || closes) {
      out.push_back(recs[k]);
    }
  }
  return out;
}

std::vector<double> order_series(const Trace& trace) {
  if (trace.empty()) {
    return {};
  }
  std::vector<TraceRecord> selected;
  const auto& recs = trace.records();
  if (recs.front().epoch) {
    selected = epoch_end_records(trace);
  } else if (recs.back().phase) {
    const auto& last_phase = recs.back().phase;
    std::copy_if(recs.begin(), recs.end(), std::back_inserter(selected),
                 [&](const TraceRecord& r) { return r.phase == last_phase; });
  } else {
    selected = recs;
  }
  const bool use_err = std::all_of(recs.begin(), recs.end(), [](const TraceRecord& r) { return r.err_fro.has_value(); });
  auto value = [use_err](const TraceRecord& r) { return use_err ? *r.err_fro : std::sqrt(2.0 * r.loss); };
  const double scale = value(recs.front());
  std::vector<double> out;
  out.reserve(selected.size());
  for (const auto& r : selected) {
    out.push_back(scale > 0.0 ? value(r) / scale : value(r));
  }
  return out;
}

Matrix prop2_product(const Matrix& x, const Matrix& w_star, std::span<const std::size_t> ordering) {
  const std::size_t n = x.rows();
  if (!x.is_square() || !w_star.is_square() || w_star.rows() != n) {
    throw DimensionError("prop2_product: X and W* must be square of equal size");
  }
  if (frobenius_norm(identity_minus(matmul(w_star, x))) > 1e-8 * static_cast<double>(n)) {
    throw PreconditionError("prop2_product: W* is not an inverse of X within tolerance");
  }
  std::vector<bool> seen(n, false);
  if (ordering.size() != n) {
    throw PreconditionError("prop2_product: ordering must be a permutation of 0..n-1");
  }
  for (std::size_t i : ordering) {
    if (i >= n || seen[i]) {
      throw PreconditionError("prop2_product: ordering must be a permutation of 0..n-1");
    }
    seen[i] = true;
  }
  const Matrix gram = matmul(transpose(w_star), w_star);
  const Matrix xt = transpose(x);
  Matrix product = Matrix::identity(n);
  for (std::size_t i : ordering) {
    // P (I - x x^T G) = P - (P x)(x^T G)
    const auto xi = xt.row(i);
    const std::vector<double> px = matvec(product, xi);
    const std::vector<double> xg = matvec_transposed(gram, xi);
    for (std::size_t a = 0; a < n; ++a) {
      auto row = product.row(a);
      for (std::size_t b = 0; b < n; ++b) {
        row[b] -= px[a] * xg[b];
      }
    }
  }
  require_finite(product, "prop2_product");
  return product;
}

Matrix prop2_cross_term(const Matrix& x, const Matrix& w_star, std::size_t i, std::size_t j) {
  const Matrix gram = matmul(transpose(w_star), w_star);
  auto factor = [&](std::size_t k) {
    const Matrix col = x.column(k);
    const Matrix row = transpose(col);
    return multiply_chain({&col, &row, &gram});
  };
  return matmul(factor(i), factor(j));
}

Matrix thm3_constant_term(const Matrix& w_star, const Matrix& x, const std::vector<double>& coeffs) {
  if (w_star.cols() != x.rows()) {
    throw DimensionError("thm3_constant_term: W* must be k x d with X d x n");
  }
  const Matrix rate = matrix_polynomial(matmul(transpose(w_star), w_star), coeffs);
  const Matrix xt = transpose(x);
  return identity_minus(multiply_chain({&x, &xt, &rate}));
}

void SpectrumInfo::validate() const {
  if (!(sigma_max >= sigma_min && sigma_min > 0.0) || n == 0) {
    throw PreconditionError("SpectrumInfo needs sigma_max >= sigma_min > 0 and n >= 1");
  }
}

double local_step_bound(double err, const SpectrumInfo& spectrum) {
  spectrum.validate();
  const double s4 = std::pow(spectrum.sigma_max, 4);
  return s4 * std::pow(err, 6) + static_cast<double>(spectrum.n) * s4 * std::pow(spectrum.sigma_min, -2) * std::pow(err, 4);
}

double rigorous_step_bound(double err, double w_star_norm, const SpectrumInfo& spectrum) {
  spectrum.validate();
  const double inner = err * err * err + 2.0 * w_star_norm * err * err;
  return std::pow(spectrum.sigma_max, 4) * inner * inner;
}

bool verify_local_bound(const TraceRecord& current, const TraceRecord& next, const SpectrumInfo& spectrum) {
  if (!current.err_fro || !next.err_fro) {
    throw PreconditionError("verify_local_bound: both records need err_fro");
  }
  const double lhs = *next.err_fro * *next.err_fro;
  return lhs <= local_step_bound(*current.err_fro, spectrum) + 1e-12;
}

} // namespace quadinv
