#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "qhlab/poincare.hpp"
#include "quadrature.hpp"

using namespace qhlab;
using qhlab::test::Gen;
using qhlab::test::quadrature_norms;

TEST_CASE("threshold examples") {
  CHECK(threshold_p0(1.0, 1.5, 0.25, 2) == doctest::Approx(13.0 / 9.0).epsilon(1e-15));
  CHECK(threshold_p0(1.0, 1.0, 1.0, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(threshold_p0(1.0, 1.0, 0.25, 2) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK_THROWS_AS(threshold_p0(0.5, 1.0, 0.5, 2), PreconditionError);
  CHECK_THROWS_AS(threshold_p0(1.0, 2.0, 0.5, 2), PreconditionError);
  CHECK_THROWS_AS(threshold_p0(1.0, 1.0, 0.0, 2), PreconditionError);
}

TEST_CASE("threshold fixed point") {
  Gen g(61);
  for (int t = 0; t < 100; ++t) {
    const int n = g.integer(2, 3);
    const double beta = g.uniform(0.01, 1.0 - 1.0 / n);
    const double lambda = g.uniform(n - 1.0, n - 1e-9);
    const double q = n - n * beta;
    if (q < 1.0) continue;
    CHECK(std::abs(threshold_p0(q, lambda, beta, n) - q) <= 1e-12);
  }
}

TEST_CASE("threshold monotonicity in lambda") {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(1.0 + 0.1 * i);
  const MonotonicityCheck c = p0_monotonicity_check(1.0, 0.25, 2, grid);
  CHECK(c.pass);
  CHECK(c.min_increment > 0.0);
  CHECK(c.values.back() - c.values.front() > 0.0);
  CHECK(p0_monotonicity_check(1.0, 0.25, 2, {1.3}).pass);
  CHECK_THROWS_AS(p0_monotonicity_check(1.5, 0.25, 2, grid), PreconditionError);

  Gen g(62);
  for (int t = 0; t < 100; ++t) {
    const double beta = g.uniform(0.01, 0.49);
    const double q = g.uniform(1.0, 2.0 - 2.0 * beta - 1e-6);
    std::vector<double> ls;
    for (int i = 0; i < 8; ++i) ls.push_back(g.uniform(1.0, 1.999));
    CHECK(p0_monotonicity_check(q, beta, 2, ls).pass);
  }
}

TEST_CASE("test function values") {
  const TestFunctionSpec s{{0, 0}, 0.125, 1.0, 1.0, 1.0, 2};
  CHECK(s.value() == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(s.eval({0, 0}) == s.value());
  CHECK(s.eval({0.01, -0.01}) == s.value());
  CHECK(s.eval({0.5, 0.5}) == 0.0);
  CHECK(s.eval({0.02, 0.0}) == 0.0);
  const Box p = s.passage();
  CHECK(s.eval({0, (p.lo.y + p.hi.y) / 2}) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(s.eval({0, p.lo.y}) == s.value());
  CHECK(s.eval({0, p.hi.y}) == doctest::Approx(0.0));
  CHECK(s.room().width() == 0.125 / 4);
}

TEST_CASE("test function closed-form norms") {
  const TestFunctionSpec s{{0, 0}, 0.125, 1.0, 1.0, 1.0, 2};
  CHECK(test_function_norms(s, 2.0).room == doctest::Approx(1.0 / 128).epsilon(1e-15));

  const TestFunctionSpec h{{0, 0}, 0.125, 0.5, 1.0, 1.0, 2};
  CHECK(h.gradient() == doctest::Approx(32768.0).epsilon(1e-14));
  CHECK(h.passage().area() == doctest::Approx(std::ldexp(1.0, -23)).epsilon(1e-14));
  CHECK(test_function_norms(h, 1.0).grad_p == doctest::Approx(std::ldexp(1.0, -8)).epsilon(1e-14));
}

TEST_CASE("test function norms agree with quadrature") {
  Gen g(63);
  for (int t = 0; t < 20; ++t) {
    const TestFunctionSpec s{g.point(-1, 1), std::ldexp(1.0, -g.integer(1, 6)), g.uniform(0.3, 1.0),
                             g.uniform(1.0, 1.99), g.uniform(1.0, 3.0), 2};
    const double p = g.uniform(1.0, 4.0);
    const TestFunctionNorms nm = test_function_norms(s, p);
    const auto [lq, gp] = quadrature_norms(s, p);
    CHECK(std::abs(lq - nm.lq) <= 1e-6 * nm.lq);
    CHECK(std::abs(gp - nm.grad_p) <= 1e-6 * nm.grad_p);
  }
}

TEST_CASE("counterexample plan") {
  const WhitneyDecomposition w = whitney_decompose(unit_square(), 10);
  const CounterexamplePlan one = build_counterexample_plan(w, 1.0, 1, false);
  REQUIRE(one.levels.size() == 1);
  CHECK(one.levels[0].cubes.size() == 2 * static_cast<std::size_t>(one.levels[0].m));

  const CounterexamplePlan plan = build_counterexample_plan(w, 1.0, 64, false);
  CHECK(plan.levels.size() >= 4);
  CHECK_FALSE(plan.complete);
  const auto census = level_counts(w);
  CHECK(census.at(plan.k0) >= 2);
  for (const auto& [j, n] : census)
    if (j < plan.k0) CHECK(n < 2);
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < plan.levels.size(); ++k) {
    const PlanLevel& lv = plan.levels[k];
    if (k > 0) CHECK(lv.j > plan.levels[k - 1].j);
    CHECK(lv.m == std::exp2(std::floor(1.0 * (lv.j - plan.k0))));
    CHECK(lv.cubes.size() == 2 * static_cast<std::size_t>(lv.m));
    CHECK(lv.census >= 2 * lv.m);
    int sum = 0;
    for (std::size_t c = 0; c < lv.cubes.size(); ++c) {
      CHECK(seen.insert(lv.cubes[c]).second);
      CHECK(w.scale_level(lv.cubes[c]) == lv.j);
      sum += lv.signs[c];
      CHECK(lv.signs[c] == (c < lv.cubes.size() / 2 ? 1 : -1));
    }
    CHECK(sum == 0);
  }
  CHECK_THROWS_AS(build_counterexample_plan(w, 1.0, 0), PreconditionError);
}

TEST_CASE("counterexample ratio sequence") {
  const WhitneyDecomposition w = whitney_decompose(unit_square(), 10);
  const CounterexamplePlan plan = build_counterexample_plan(w, 1.0, 64);
  CHECK(plan.levels.size() == 64);
  CHECK(plan.complete);
  const double q = 1.0, p = 1.26, beta = 0.25;
  REQUIRE(p < threshold_p0(q, 1.0, beta, 2));
  const RatioSequence s = counterexample_sequence(plan, beta, q, p);
  REQUIRE(s.rows.size() == 64);
  for (std::size_t i = 1; i < s.rows.size(); ++i) {
    CHECK(s.rows[i].a >= s.rows[i - 1].a);
    CHECK(s.rows[i].b >= s.rows[i - 1].b);
  }
  const TestFunctionSpec first{{0, 0}, plan.levels[0].side, beta, 1.0, q, 2};
  CHECK(std::pow(s.rows[0].a, q) >= 2 * plan.levels[0].m * test_function_norms(first, p).room);
  CHECK(s.slope >= 0.9 * (1 / q - 1 / p));

  const PredicateResult r = supports_poincare_predicate({2, q, p, 1.0, beta});
  CHECK(r.verdict != Verdict::Supported);

  CHECK_THROWS_AS(counterexample_sequence(plan, beta, 2.0, 1.5), PreconditionError);
  CHECK(std::abs(counterexample_signed_integral(plan, w, beta, q, 64)) <= 1e-9);
}

TEST_CASE("grid functions") {
  const GridFunction g = build_grid(unit_square(), 1.0 / 16, 2.0);
  CHECK(g.nodes.size() == 15 * 15);
  for (const Point& x : g.nodes) CHECK(unit_square().contains(x));
  GridFunction c = g;
  c.u.assign(c.nodes.size(), 3.0);
  CHECK(c.mean() == 3.0);
  CHECK_THROWS_AS(grid_quotient(c, 2.0, 2.0), PreconditionError);
  for (std::size_t i = 0; i < c.u.size(); ++i) c.u[i] = c.nodes[i].x;
  CHECK(grid_quotient(c, 2.0, 2.0) > 0.0);
  GridFunction empty;
  CHECK_THROWS_AS(grid_quotient(empty, 2.0, 2.0), PreconditionError);
}

TEST_CASE("discrete lower bound on the square") {
  const Domain sq = unit_square();
  const WhitneyDecomposition w = whitney_decompose(sq, 6);
  const PoincareEstimate e = discrete_poincare_lower_bound(sq, w, 2.0, 2.0, 1.0 / 128);
  CHECK(e.quotient >= 0.9 / M_PI);
  CHECK(grid_quotient(e.best, 2.0, 2.0) == e.quotient);
  REQUIRE_FALSE(e.history.empty());
  for (std::size_t i = 1; i < e.history.size(); ++i) CHECK(e.history[i] >= e.history[i - 1]);
  CHECK_FALSE(e.start.empty());
}

TEST_CASE("estimator is deterministic for a seed") {
  const Domain l = l_shape();
  const WhitneyDecomposition w = whitney_decompose(l, 5);
  EstimatorOptions o;
  o.iters = 30;
  o.seed = 7;
  const PoincareEstimate a = discrete_poincare_lower_bound(l, w, 1.0, 1.5, 1.0 / 16, o);
  const PoincareEstimate b = discrete_poincare_lower_bound(l, w, 1.0, 1.5, 1.0 / 16, o);
  CHECK(a.quotient == b.quotient);
  CHECK(a.best.u == b.best.u);
}

TEST_CASE("predicate examples") {
  const PredicateResult a = supports_poincare_predicate({2, 1.0, 1.6, 1.5, 0.25});
  CHECK(a.verdict == Verdict::Supported);
  CHECK(a.p0 == doctest::Approx(13.0 / 9.0));

  const PredicateResult b = supports_poincare_predicate({2, 1.0, 1.05, 1.0, 0.1}, 5.0);
  CHECK(b.verdict == Verdict::CounterexampleRegime);
  CHECK(b.conditional);
  CHECK(supports_poincare_predicate({2, 1.0, 1.05, 1.0, 0.1}).verdict == Verdict::Unknown);

  const PredicateResult c = supports_poincare_predicate({2, 1.5, 1.5, 1.5, 0.25});
  CHECK(c.verdict == Verdict::Unknown);
  CHECK(c.rule.find("boundary") != std::string::npos);

  CHECK_THROWS_AS(supports_poincare_predicate({2, 2.0, 1.5, 1.5, 0.25}), PreconditionError);
  CHECK_THROWS_AS(supports_poincare_predicate({2, 1.0, 1.5, 1.5, 0.25}, -1.0), PreconditionError);
  CHECK(std::string(verdict_name(Verdict::CounterexampleRegime)) == "CounterexampleRegime");
}

TEST_CASE("Neumann solvability") {
  CHECK(neumann_q_solvable(2, 0.5, 1.0) == Solvable::True);
  CHECK(neumann_q_solvable(3, 0.2, 1.0) == Solvable::Unknown);
  CHECK(neumann_q_solvable(2, 0.5, 2.0) == Solvable::Unknown);
  CHECK_THROWS_AS(neumann_q_solvable(1, 0.5, 1.0), PreconditionError);
}

TEST_CASE("CSV writers") {
  std::ostringstream a, b;
  write_threshold_csv(a, 2, 1.0, 0.25, {1.0, 1.5});
  CHECK(a.str() == "n,q,lambda,beta,p0\n2,1,1,0.25,1.3999999999999999\n2,1,1.5,0.25,1.4444444444444444\n");
  RatioSequence s;
  s.rows.push_back({1, 2.0, 4.0});
  write_ratio_csv(b, s);
  CHECK(b.str() == "m,A_m,B_m,ratio\n1,2,4,0.5\n");
}
