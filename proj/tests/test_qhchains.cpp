#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "qhlab/qhchains.hpp"

using namespace qhlab;
using qhlab::test::Gen;

namespace {

struct Setup {
  Domain domain;
  WhitneyDecomposition w;
  CubeGraph g;
  ChainTree t;
};

Setup make(const Domain& d, int j_max) {
  Setup s{d, whitney_decompose(d, j_max), {}, {}};
  s.g = build_cube_graph(s.w);
  qh_edge_weights(s.g, s.w, s.domain);
  s.t = chain_tree(s.g, s.w, base_cube(s.w, s.domain.distinguished_point()));
  return s;
}

// Columns of width 1/n under the unit circle, inscribed.
Domain staircase_disc(int n) {
  std::vector<Box> boxes;
  for (int i = 0; i < 2 * n; ++i) {
    const double x0 = -1.0 + static_cast<double>(i) / n, x1 = x0 + 1.0 / n;
    const double m = std::max(std::abs(x0), std::abs(x1));
    const double h = std::sqrt(std::max(0.0, 1.0 - m * m));
    if (h > 0) boxes.push_back({{x0, -h}, {x1, h}});
  }
  return build_box_union(boxes);
}

Setup single_cube() {
  Setup s{unit_square(), {}, {}, {}};
  s.w.lattice = {{0, 0}, 1.0};
  s.w.cubes = {{{1, 0, 0}, 0.5}};
  s.w.levels[1] = {0};
  s.g = build_cube_graph(s.w);
  s.g.node_dist = {0.5};
  s.t = chain_tree(s.g, s.w, 0);
  return s;
}

}  // namespace

TEST_CASE("edge weights") {
  const Setup s = make(unit_square(), 7);
  std::size_t equal_pairs = 0;
  for (std::size_t i = 0; i < s.g.size(); ++i) {
    const auto nb = s.g.neighbors(i);
    const auto wt = s.g.neighbor_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      CHECK(nb[k] != i);
      const auto back = s.g.neighbors(nb[k]);
      const auto pos = std::find(back.begin(), back.end(), i) - back.begin();
      CHECK(s.g.neighbor_weights(nb[k])[static_cast<std::size_t>(pos)] == wt[k]);
      if (s.w.cubes[i].cube.level == s.w.cubes[nb[k]].cube.level &&
          box_box_distance(s.w.box(i), s.w.box(nb[k])) == 0.0 &&
          (s.w.center(i).x == s.w.center(nb[k]).x || s.w.center(i).y == s.w.center(nb[k]).y)) {
        ++equal_pairs;
        CHECK(wt[k] >= 1.0 / (4.5 * std::sqrt(2.0)));
        CHECK(wt[k] <= 1.0 / std::sqrt(2.0));
      }
    }
  }
  CHECK(equal_pairs > 0);
}

TEST_CASE("quasihyperbolic distance estimate") {
  const Setup s = make(unit_square(), 7);
  const SpatialIndex idx = cube_index(s.w);
  Gen g(41);
  for (int t = 0; t < 100; ++t) {
    const Point x = g.point(0.01, 0.99), y = g.point(0.01, 0.99);
    if (host_cube(s.w, idx, x) < 0 || host_cube(s.w, idx, y) < 0) continue;
    CHECK(qh_distance(s.g, s.w, s.domain, idx, x, y) == qh_distance(s.g, s.w, s.domain, idx, y, x));
    CHECK(qh_distance(s.g, s.w, s.domain, idx, x, x) == 0.0);
    CHECK(qh_distance(s.g, s.w, s.domain, idx, x, y) >= 0.0);
  }
}

TEST_CASE("quasihyperbolic distance on a staircase disc") {
  const Setup s = make(staircase_disc(256), 10);
  const SpatialIndex idx = cube_index(s.w);
  const double k = qh_distance(s.g, s.w, s.domain, idx, {0, 0}, {0.9, 0});
  const double exact = std::log(10.0);
  CHECK(k >= exact / 2);
  CHECK(k <= exact * 2);
}

TEST_CASE("chain tree basics") {
  for (const Domain& d : {unit_square(), l_shape(), build_disk_minus_fractal(1.0, 3)}) {
    const Setup s = make(d, 7);
    CHECK(s.t.length[s.t.root] == 0);
    CHECK(check_chain_condition(s.t, s.w));
    for (std::size_t r : s.g.neighbors(s.t.root))
      if (s.t.contains(r)) CHECK(s.t.length[r] == 1);
    for (std::size_t i : s.t.order) {
      const auto c = s.t.chain(i);
      CHECK(c.front() == s.t.root);
      CHECK(c.back() == i);
      CHECK(static_cast<int>(c.size()) == s.t.length[i] + 1);
    }
    const ChainConstants cc = chain_constants(s.t, s.w, 1.0);
    CHECK(std::isfinite(cc.comparability()));
    CHECK(cc.comparability() > 0.0);
  }
}

TEST_CASE("shadows") {
  const Setup s = make(l_shape(), 7);
  const auto meas = shadow_measures(s.t, s.w);
  double total = 0.0;
  for (std::size_t i : s.t.order) total += s.w.area(i);
  CHECK(meas[s.t.root] == doctest::Approx(total).epsilon(1e-12));
  CHECK(shadow_cubes(s.t, s.t.root).size() == s.t.reachable());
  for (std::size_t i : s.t.order)
    if (s.t.children_of(i).empty()) {
      CHECK(shadow_cubes(s.t, i) == std::vector<std::size_t>{i});
      CHECK(meas[i] == s.w.area(i));
    }
  Gen g(42);
  for (int t = 0; t < 200; ++t) {
    const std::size_t r = s.t.order[static_cast<std::size_t>(g.integer(0, static_cast<int>(s.t.reachable()) - 1))];
    const auto sr = shadow_cubes(s.t, r);
    for (const std::size_t q : s.t.chain(r)) {
      const auto sq = shadow_cubes(s.t, q);
      CHECK(std::includes(sq.begin(), sq.end(), sr.begin(), sr.end()));
    }
  }
}

TEST_CASE("level classification") {
  for (int j : {5, 6, 7}) {
    const Setup s = make(unit_square(), j);
    const QhbcFit fit = qhbc_fit(s.t, s.g);
    const ShadowStats st = classify_levels(s.t, s.w, fit.beta, 1.0);
    CHECK(st.coverage() == 1.0);
    CHECK(st.violations == 0);
    CHECK(st.counting_ratio > 0.0);
    CHECK(std::isfinite(st.counting_ratio));
    for (std::size_t i : s.t.order)
      if (st.measure[i] == s.w.area(i)) CHECK(st.k[i] == 0);
  }
  const Setup s = make(unit_square(), 5);
  CHECK_THROWS_AS(classify_levels(s.t, s.w, 0.0, 1.0), PreconditionError);
}

TEST_CASE("QHBC fit on the square") {
  const Setup s = make(unit_square(), 8);
  const QhbcFit fit = qhbc_fit(s.t, s.g);
  CHECK(fit.beta >= 0.8);
  CHECK(fit.beta <= 1.2);
  CHECK(std::isfinite(fit.c));
  for (const auto& r : fit.rows) {
    CHECK(r.residual <= 1e-12);
    CHECK(r.khat <= fit.slope * r.log_inv_dist + fit.c + 1e-12);
  }
  const Setup one = single_cube();
  CHECK_THROWS_AS(qhbc_fit(one.t, one.g), PreconditionError);
}

TEST_CASE("shadow sums") {
  const Setup s = make(unit_square(), 6);
  const auto sums = shadow_sums(s.t, s.w, 1.0);
  const auto meas = shadow_measures(s.t, s.w);
  for (std::size_t i : s.t.order) CHECK(sums[i] == doctest::Approx(meas[i]).epsilon(1e-12));
  const auto sums2 = shadow_sums(s.t, s.w, 2.0);
  for (std::size_t i : s.t.order) {
    if (s.t.children_of(i).empty()) CHECK(sums2[i] == s.t.length[i] * s.w.area(i));
    CHECK(sums2[i] >= 0.0);
  }
  CHECK_THROWS_AS(shadow_sums(s.t, s.w, 0.5), PreconditionError);
  const ShadowSumRatio r = shadow_sum_ratio(s.t, s.w, 1.0, 0.1);
  CHECK(r.max_ratio > 0.0);
  CHECK_THROWS_AS(shadow_sum_ratio(s.t, s.w, 1.0, 1.0), PreconditionError);
}

TEST_CASE("sigma sum of a single cube") {
  const Setup one = single_cube();
  const auto& t = one.t;
  const auto& w = one.w;
  for (double p : {1.5, 2.0, 3.0}) {
    const SigmaSeries sg = sigma_chain_sum(t, w, 1.0, p);
    const double area = 0.25;
    CHECK(sg.total == doctest::Approx(std::pow(area, (1.0 + 0.5 - 1.0 / p) * p / (p - 1.0))).epsilon(1e-13));
  }
  CHECK_THROWS_AS(sigma_chain_sum(t, w, 2.0, 2.0), PreconditionError);
}

TEST_CASE("sigma sum grows with resolution") {
  double prev = 0.0;
  for (int j = 5; j <= 8; ++j) {
    const Setup s = make(unit_square(), j);
    const SigmaSeries sg = sigma_chain_sum(s.t, s.w, 1.0, 2.0);
    CHECK(sg.total >= prev);
    prev = sg.total;
    double acc = 0.0;
    for (std::size_t i = 0; i < sg.increments.size(); ++i) {
      acc += sg.increments[i];
      CHECK(sg.partial_sums[i] == doctest::Approx(acc).epsilon(1e-14));
    }
  }
}

TEST_CASE("John constant estimates") {
  const Setup sq = make(unit_square(), 7);
  const double a = john_constant_estimate(sq.t, sq.w, sq.g, sq.domain);
  CHECK(a >= 0.2);
  CHECK(a <= 1.0);
  const Setup k = make(build_disk_minus_fractal(1.0, 4), 8);
  const double b = john_constant_estimate(k.t, k.w, k.g, k.domain);
  CHECK(b >= 0.05);
  CHECK(b <= 1.0);
}

TEST_CASE("apartment groups follow the nearest base cube") {
  const Domain sq = unit_square();
  const WhitneyDecomposition base = whitney_decompose(sq, 4);
  const BetaVersionDomain bv = build_beta_version(sq, base, 0.5);
  const WhitneyDecomposition w = whitney_decompose(bv.domain, 7);
  const auto group = apartment_groups(w, base);
  REQUIRE(group.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool found = false;
    for (std::size_t b = 0; b < base.size() && !found; ++b)
      found = base.box(b).contains(w.center(i)) && base.scale_level(b) == group[i];
    if (found) continue;
    // Outside every base cube: the group level belongs to some base cube.
    bool level_exists = false;
    for (std::size_t b = 0; b < base.size(); ++b) level_exists = level_exists || base.scale_level(b) == group[i];
    CHECK(level_exists);
  }
}

TEST_CASE("CSV writers") {
  const Setup s = make(unit_square(), 5);
  const QhbcFit fit = qhbc_fit(s.t, s.g);
  const ShadowStats st = classify_levels(s.t, s.w, fit.beta, 1.0);
  std::ostringstream a, b, c, d;
  write_chains_csv(a, s.t, s.w, s.g);
  write_shadows_csv(b, st, s.t);
  write_qhbc_csv(c, fit);
  write_sigma_csv(d, sigma_chain_sum(s.t, s.w, 1.0, 2.0));
  CHECK(a.str().rfind("id,j,ell,khat,dist\n", 0) == 0);
  CHECK(b.str().rfind("id,shadow,k\n", 0) == 0);
  CHECK(c.str().rfind("id,log_inv_dist,khat,residual\n", 0) == 0);
  CHECK(d.str().rfind("j,increment,partial_sum\n", 0) == 0);
}
