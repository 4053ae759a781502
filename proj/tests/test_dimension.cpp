#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "qhlab/dimension.hpp"
#include "qhlab/whitney.hpp"

using namespace qhlab;
using qhlab::test::Gen;

namespace {

Primitives unit_segment() {
  Primitives p;
  p.segments.push_back(make_segment({0, 0}, {1, 0}));
  return p;
}

// Cells hit by a sample grid of step r/4 over each closed box, both ends included.
std::size_t sampled_count(const std::vector<Box>& boxes, double r) {
  std::set<std::pair<long, long>> cells;
  for (const Box& b : boxes) {
    const int nx = static_cast<int>(std::ceil(b.width() / (r / 4))), ny = static_cast<int>(std::ceil(b.height() / (r / 4)));
    for (int i = 0; i <= nx; ++i)
      for (int k = 0; k <= ny; ++k) {
        const double x = i == nx ? b.hi.x : b.lo.x + i * r / 4, y = k == ny ? b.hi.y : b.lo.y + k * r / 4;
        cells.insert({static_cast<long>(std::floor(x / r)), static_cast<long>(std::floor(y / r))});
      }
  }
  return cells.size();
}

}  // namespace

TEST_CASE("box counts of simple sets") {
  CHECK(box_count(unit_segment(), 1.0 / 16) == 17);
  CHECK(box_count(Primitives{}, 0.1) == 0);
  Primitives pt;
  pt.points.push_back({0.3, 0.7});
  CHECK(box_count(pt, 0.01) == 1);
  CHECK_THROWS_AS(box_count(unit_segment(), 0.0), PreconditionError);
  CHECK_THROWS_AS(box_count(unit_segment(), 2.0), PreconditionError);
}

TEST_CASE("box count of the depth-6 fractal") {
  const Primitives k6 = ifs_primitives(make_four_corner_ifs(1.0), 6);
  const double r = std::ldexp(1.0, -12);
  const std::size_t n = box_count(k6, r);
  CHECK(n == sampled_count(k6.boxes, r));
  // Closed boxes of side 2r on the r-grid touch a 3 x 3 block of cells.
  CHECK(n == 36864);
}

TEST_CASE("box counts match a sampled grid scan") {
  Gen g(51);
  for (int t = 0; t < 60; ++t) {
    std::vector<Box> boxes;
    const int m = g.integer(1, 6);
    for (int i = 0; i < m; ++i) boxes.push_back(g.dyadic_box(32));
    Primitives p;
    p.boxes = boxes;
    const double r = std::ldexp(1.0, -g.integer(3, 7));
    CHECK(box_count(p, r) == sampled_count(boxes, r));
  }
}

TEST_CASE("box counts are monotone in r") {
  const std::vector<Primitives> sets{unit_segment(), ifs_primitives(make_four_corner_ifs(1.0), 4),
                                     boundary_primitives(unit_square())};
  for (const Primitives& s : sets) {
    const auto radii = dyadic_radii(9);
    for (std::size_t i = 1; i < radii.size(); ++i) CHECK(box_count(s, radii[i]) >= box_count(s, radii[i - 1]));
  }
}

TEST_CASE("Minkowski fits") {
  const auto seg = box_count_series(unit_segment(), dyadic_radii(12), 1.0);
  CHECK(minkowski_fit(seg).slope == doctest::Approx(1.0).epsilon(0.05));
  for (std::size_t i = 0; i < seg.points.size(); ++i) {
    CHECK(seg.points[i].precontent == doctest::Approx(seg.points[i].count * seg.points[i].r).epsilon(1e-14));
    if (i > 0) CHECK(seg.points[i].r < seg.points[i - 1].r);
  }

  const auto k1 = box_count_series(ifs_primitives(make_four_corner_ifs(1.0), 6), dyadic_radii(12), 1.0);
  const DimensionEstimate e1 = minkowski_fit(k1);
  CHECK(std::abs(e1.slope - 1.0) <= 0.05);
  CHECK(e1.used >= 4);
  CHECK(e1.scale_min < e1.scale_max);

  const double lambda = std::log(4.0) / std::log(8.0 / 3.0);
  const auto k2 = box_count_series(ifs_primitives(make_four_corner_ifs(lambda), 6), dyadic_radii(8), lambda);
  CHECK(std::abs(minkowski_fit(k2).slope - 1.4133) <= 0.07);

  BoxCountSeries short_series = seg;
  short_series.points.resize(3);
  CHECK_THROWS_AS(minkowski_fit(short_series), PreconditionError);
}

TEST_CASE("Whitney census slopes") {
  const Domain sq = unit_square();
  const WhitneyDecomposition w = whitney_decompose(sq, 10);
  const DimensionEstimate ws = whitney_dim_estimate(level_counts(w), 8);
  CHECK(ws.slope == doctest::Approx(1.0).epsilon(0.15));
  const DimensionEstimate ms = minkowski_fit(box_count_series(boundary_primitives(sq), dyadic_radii(10), 1.0));
  CHECK(std::abs(ws.slope - ms.slope) <= 0.15);

  const WhitneyDecomposition wk = whitney_decompose(build_disk_minus_fractal(1.0, 6), 10);
  const DimensionEstimate wkd = whitney_dim_estimate(level_counts(wk), 8);
  CHECK(std::abs(wkd.slope - 1.0) <= 0.15);

  CHECK_THROWS_AS(whitney_dim_estimate({{1, 2}, {2, 4}, {3, 8}}, 10), PreconditionError);
}

TEST_CASE("greedy ball packing") {
  const Packing a = greedy_ball_pack(unit_segment(), 0.25);
  CHECK(a.count == 3);
  REQUIRE(a.centers.size() == 3);
  CHECK(a.centers[0] == Point{0, 0});
  CHECK(a.centers[1] == Point{0.5, 0});
  CHECK(a.centers[2] == Point{1, 0});

  Primitives pt;
  pt.points.push_back({0.1, 0.2});
  CHECK(greedy_ball_pack(pt, 0.5).count == 1);
  CHECK_THROWS_AS(greedy_ball_pack(pt, 1.5), PreconditionError);

  const Primitives k6 = ifs_primitives(make_four_corner_ifs(1.0), 6);
  double lo = INFINITY, hi = 0.0;
  for (int i = 1; i <= 6; ++i) {
    const double r = std::pow(4.0, -i);
    const Packing p = greedy_ball_pack(k6, r);
    const double nr = static_cast<double>(p.count) * r;
    lo = std::min(lo, nr);
    hi = std::max(hi, nr);
    double closest = INFINITY;
    for (std::size_t x = 0; x < p.centers.size(); ++x)
      for (std::size_t y = x + 1; y < p.centers.size(); ++y) closest = std::min(closest, distance(p.centers[x], p.centers[y]));
    CHECK(closest >= 2 * r);
  }
  CHECK(hi <= 4 * lo);
}

TEST_CASE("packing is bounded by the half-scale cover") {
  const std::vector<Primitives> sets{unit_segment(), ifs_primitives(make_four_corner_ifs(1.0), 5),
                                     boundary_primitives(l_shape())};
  for (const Primitives& s : sets)
    for (int i = 2; i <= 6; ++i) {
      const double r = std::ldexp(1.0, -i);
      CHECK(greedy_ball_pack(s, r).count <= box_count(s, r / 2));
    }
}

TEST_CASE("box count CSV") {
  std::ostringstream out;
  write_boxcount_csv(out, box_count_series(unit_segment(), dyadic_radii(4), 1.0));
  CHECK(out.str().rfind("r,N,precontent\n0.5,3,", 0) == 0);
}
