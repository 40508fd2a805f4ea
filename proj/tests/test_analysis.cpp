#include <doctest.h>

#include <cmath>
#include <vector>

#include "quadinv/analysis.hpp"
#include "quadinv/error.hpp"
#include "quadinv/linalg.hpp"
#include "quadinv/problem.hpp"
#include "quadinv/solvers.hpp"

using namespace quadinv;

TEST_CASE("estimate_order examples") {
  const std::vector<double> quad{1e-2, 1e-4, 1e-8, 1e-16};
  const OrderEstimate q = estimate_order(quad, {1e-1, 1e-17});
  CHECK(q.sufficient);
  CHECK(std::abs(q.order - 2.0) <= 1e-9);

  std::vector<double> lin;
  for (int t = 0; t <= 40; ++t) {
    lin.push_back(std::pow(0.5, t));
  }
  const OrderEstimate l = estimate_order(lin, {1e-1, 1e-12});
  CHECK(l.sufficient);
  CHECK(std::abs(l.order - 1.0) <= 1e-9);

  const std::vector<double> two{1e-3, 1e-6};
  CHECK_FALSE(estimate_order(two).sufficient);
}

TEST_CASE("estimate_order is exact on synthetic recurrences") {
  const OrderWindow wide{1e300, 1e-300};
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    for (double c : {0.5, 2.0}) {
      std::vector<double> errs{1e-3};
      while (errs.size() < 8 && c * std::pow(errs.back(), p) > 1e-290) {
        errs.push_back(c * std::pow(errs.back(), p));
      }
      const OrderEstimate est = estimate_order(errs, wide);
      CAPTURE(p);
      CAPTURE(c);
      REQUIRE(est.sufficient);
      CHECK(std::abs(est.order - p) <= 1e-9);
      CHECK(std::abs(est.intercept - std::log(c)) <= 1e-6);
    }
  }
}

TEST_CASE("estimate_order preconditions and window bookkeeping") {
  const std::vector<double> negative{1e-3, -1e-6, 1e-12};
  CHECK_THROWS_AS(estimate_order(negative), PreconditionError);
  const std::vector<double> nan{1e-3, NAN};
  CHECK_THROWS_AS(estimate_order(nan), PreconditionError);
  const std::vector<double> ok{1e-3, 1e-6};
  CHECK_THROWS_AS(estimate_order(ok, {1e-10, 1e-2}), PreconditionError);

  const std::vector<double> with_zero{1e-3, 1e-6, 1e-12, 0.0};
  const OrderEstimate z = estimate_order(with_zero);
  CHECK(z.points_used == 3);
  CHECK(z.pairs_used == 2);
  CHECK(z.window.hi == 1e-2);
  CHECK(z.window.lo == 1e-13);
}

TEST_CASE("estimate_order_auto widens the window only when needed") {
  const std::vector<double> newton{1.0, 0.6, 0.36, 2.8e-2, 4.7e-4, 1.3e-7, 1e-14};
  const OrderEstimate narrow = estimate_order(newton);
  CHECK_FALSE(narrow.sufficient);
  const OrderEstimate wide = estimate_order_auto(newton);
  CHECK(wide.sufficient);
  CHECK(wide.window.hi == kWideOrderWindow.hi);
  CHECK(wide.order > 1.8);

  const std::vector<double> quad{1e-1, 1e-2, 1e-4, 1e-8, 1e-16};
  CHECK(estimate_order_auto(quad).window.hi == 1e-2);
}

TEST_CASE("order_series selection") {
  Trace sgd;
  sgd.append({.iter = 0, .epoch = 0, .loss = 8.0, .err_fro = 4.0});
  sgd.append({.iter = 1, .epoch = 1, .sample_index = 0, .loss = 5.0, .err_fro = 3.0});
  sgd.append({.iter = 2, .epoch = 1, .sample_index = 1, .loss = 2.0, .err_fro = 2.0});
  sgd.append({.iter = 3, .epoch = 2, .sample_index = 1, .loss = 1.0, .err_fro = 1.0});
  sgd.append({.iter = 4, .epoch = 2, .sample_index = 0, .loss = 0.5, .err_fro = 0.5});
  CHECK(order_series(sgd) == std::vector<double>{1.0, 0.5, 0.125});
  CHECK(epoch_end_records(sgd).size() == 3);

  Trace hybrid;
  hybrid.append({.iter = 0, .phase = "warm", .loss = 2.0});
  hybrid.append({.iter = 1, .phase = "warm", .loss = 0.5});
  hybrid.append({.iter = 2, .phase = "adaptive", .loss = 0.02});
  hybrid.append({.iter = 3, .phase = "adaptive", .loss = 0.0002});
  const auto series = order_series(hybrid);
  REQUIRE(series.size() == 2);
  // Relative to the trace's first record, sqrt(2 * 2.0).
  CHECK(series[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(series[1] == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("prop2_product") {
  CHECK(frobenius_norm(prop2_product(Matrix{{2}}, Matrix{{0.5}}, std::vector<std::size_t>{0})) <= 1e-15);

  Rng shuffler(77);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomMatrixSpec spec;
    spec.n = 10;
    spec.seed = seed;
    spec.condition_cap = 1e4;
    const InvertibleProblem p = gen_invertible(spec);
    for (int k = 0; k < 20; ++k) {
      const auto ordering = shuffler.permutation(10);
      CHECK(frobenius_norm(prop2_product(p.x, p.w_star, ordering)) <= 1e-8);
    }
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) {
        if (i != j) {
          CHECK(frobenius_norm(prop2_cross_term(p.x, p.w_star, i, j)) <= 1e-10 * frobenius_norm(p.w_star) *
                                                                               frobenius_norm(p.w_star));
        }
      }
    }
  }

  const std::vector<std::size_t> bad{0, 0};
  CHECK_THROWS_AS(prop2_product(Matrix::identity(2), Matrix::identity(2), bad), PreconditionError);
  const std::vector<std::size_t> ord{0, 1};
  CHECK_THROWS_AS(prop2_product(Matrix::identity(2), 2.0 * Matrix::identity(2), ord), PreconditionError);
}

TEST_CASE("thm3_constant_term") {
  Rng rng(3);
  const Matrix x = gaussian_matrix(4, 6, rng);
  const Matrix zero(3, 4);
  const Matrix expected = identity_minus(matmul(x, transpose(x)));
  CHECK(frobenius_norm(thm3_constant_term(zero, x, {1.0}) - expected) <= 1e-12 * frobenius_norm(expected));

  CHECK(std::abs(thm3_constant_term(Matrix{{0.5}}, Matrix{{2}}, {0.0, 1.0})(0, 0)) <= 1e-15);

  RandomMatrixSpec inv;
  inv.n = 8;
  inv.seed = 2;
  inv.condition_cap = 1e3;
  const InvertibleProblem p = gen_invertible(inv);
  CHECK(frobenius_norm(thm3_constant_term(p.w_star, p.x, {0.0, 1.0})) <= 1e-10 * frobenius_norm(p.x) *
                                                                             frobenius_norm(p.x));

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomMatrixSpec spec;
    spec.n = 8;
    spec.seed = seed;
    spec.kind = MatrixKind::rank_deficient_target;
    spec.rank = 4;
    const RankDeficientProblem r = gen_rank_deficient(spec);
    for (const std::vector<double>& coeffs :
         {std::vector<double>{0.0, 1.0}, std::vector<double>{1.0}, std::vector<double>{0.3, -0.2, 0.05}}) {
      CHECK(frobenius_norm(thm3_constant_term(r.w_star, r.x, coeffs)) >= 1e-8);
    }
  }
}

TEST_CASE("one-step error bounds") {
  SUBCASE("exact pair") {
    const TraceRecord a{.iter = 0, .loss = 0.0, .err_fro = 0.0};
    const TraceRecord b{.iter = 1, .loss = 0.0, .err_fro = 0.0};
    CHECK(verify_local_bound(a, b, {2.0, 2.0, 1}));
  }
  SUBCASE("the local bound fails on the 1x1 example") {
    const SpectrumInfo s{2.0, 2.0, 1};
    CHECK(local_step_bound(0.1, s) == doctest::Approx(16e-6 + 16 * 0.25 * 1e-4).epsilon(1e-12));
    const Matrix w1 = adaptive_gd_step(Matrix{{0.4}}, Matrix{{2}});
    const double next = std::abs(w1(0, 0) - 0.5);
    CHECK(next == doctest::Approx(0.036).epsilon(1e-12));
    const TraceRecord a{.iter = 0, .loss = 0.02, .err_fro = 0.1};
    const TraceRecord b{.iter = 1, .loss = 0.5 * 0.072 * 0.072, .err_fro = next};
    CHECK_FALSE(verify_local_bound(a, b, s));
    CHECK(next * next <= rigorous_step_bound(0.1, 0.5, s));
  }
  SUBCASE("the rigorous bound holds on random instances near the solution") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RandomMatrixSpec spec;
      spec.n = 6;
      spec.seed = seed;
      spec.condition_cap = 1e2;
      const InvertibleProblem p = gen_invertible(spec);
      Rng rng(seed);
      const Matrix u = 1e-3 * gaussian_matrix(6, 6, rng);
      const Matrix w1 = adaptive_gd_step(p.w_star + u, p.x);
      const double e = frobenius_norm(u);
      const double e1 = frobenius_norm(w1 - p.w_star);
      const SpectrumInfo s{p.sigma.front(), p.sigma.back(), 6};
      CHECK(e1 * e1 <= rigorous_step_bound(e, frobenius_norm(p.w_star), s) * (1 + 1e-9));
    }
  }
  SUBCASE("missing err_fro") {
    const TraceRecord a{.iter = 0, .loss = 0.1};
    const TraceRecord b{.iter = 1, .loss = 0.01, .err_fro = 0.1};
    CHECK_THROWS_AS(verify_local_bound(a, b, {1.0, 1.0, 1}), PreconditionError);
    CHECK_THROWS_AS((SpectrumInfo{1.0, 2.0, 1}.validate()), PreconditionError);
  }
}
