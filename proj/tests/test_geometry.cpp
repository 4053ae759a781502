#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "gen.hpp"
#include "qhlab/domains.hpp"
#include "qhlab/geometry.hpp"

using namespace qhlab;
using qhlab::test::Gen;

namespace {

Box unit() { return {{0, 0}, {1, 1}}; }

// Dense sampling of a closed box.
template <class F>
void sample_box(const Box& b, int n, F&& f) {
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k)
      f(Point{b.lo.x + b.width() * i / n, b.lo.y + b.height() * k / n});
}

}  // namespace

TEST_CASE("point to box distance") {
  CHECK(point_box_distance({0, 0}, {{1, 0}, {2, 1}}) == 1.0);
  CHECK(point_box_distance({0.5, 0.5}, unit()) == 0.0);
  CHECK(point_box_distance({2, 2}, unit()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(point_box_distance({1, 0.25}, unit()) == 0.0);
}

TEST_CASE("point to segment distance") {
  CHECK(point_segment_distance({0, 1}, make_segment({0, 0}, {2, 0})) == 1.0);
  CHECK(point_segment_distance({3, 0}, make_segment({0, 0}, {2, 0})) == 1.0);
  CHECK(point_segment_distance({3, 4}, make_segment({0, 0}, {0, 1})) ==
        doctest::Approx(std::sqrt(18.0)).epsilon(1e-15));
  CHECK_THROWS_AS(make_segment({0, 0}, {1, 1}), PreconditionError);
}

TEST_CASE("point to box distance agrees with dense sampling") {
  Gen g(11);
  for (int t = 0; t < 200; ++t) {
    const Box b = g.box();
    const Point p = g.point(-6, 6);
    double brute = INFINITY;
    sample_box(b, 60, [&](Point q) { brute = std::min(brute, distance(p, q)); });
    const double d = point_box_distance(p, b);
    CHECK(d <= brute + 1e-12);
    CHECK(brute - d <= std::hypot(b.width(), b.height()) / 60 + 1e-12);
  }
}

TEST_CASE("box to box distance and far distance") {
  Gen g(12);
  for (int t = 0; t < 200; ++t) {
    const Box a = g.box(), b = g.box();
    double brute = INFINITY;
    sample_box(a, 40, [&](Point q) { brute = std::min(brute, point_box_distance(q, b)); });
    const double d = box_box_distance(a, b);
    CHECK(d <= brute + 1e-12);
    CHECK(brute - d <= std::hypot(a.width(), a.height()) / 40 + 1e-12);
    CHECK(d == box_box_distance(b, a));
    CHECK((d == 0.0) == a.intersects(b));

    const Point p = g.point(-6, 6);
    double far = 0.0;
    for (Point c : b.corners()) far = std::max(far, distance(p, c));
    CHECK(point_box_max_distance(p, b) == doctest::Approx(far).epsilon(1e-14));
  }
}

TEST_CASE("segment box intersection agrees with sampling along the segment") {
  Gen g(13);
  for (int t = 0; t < 400; ++t) {
    const Box b = g.dyadic_box(16);
    const Box sb = g.dyadic_box(16);
    const Segment s = g.coin() ? Segment{sb.lo, {sb.hi.x, sb.lo.y}} : Segment{sb.lo, {sb.lo.x, sb.hi.y}};
    bool hit = false;
    for (int i = 0; i <= 512 && !hit; ++i) {
      const double u = i / 512.0;
      hit = b.contains(Point{s.a.x + u * (s.b.x - s.a.x), s.a.y + u * (s.b.y - s.a.y)});
    }
    CHECK(segment_intersects_box(s, b) == hit);
  }
}

TEST_CASE("dyadic children tile the parent") {
  const DyadicLattice lat{{0, 0}, 1.0};
  const auto kids = dyadic_children({0, 0, 0});
  std::set<std::pair<double, double>> corners;
  double area = 0.0;
  for (const auto& k : kids) {
    const Box b = cube_box(lat, k);
    CHECK(b.width() == 0.5);
    CHECK(b.height() == 0.5);
    corners.insert({b.lo.x, b.lo.y});
    area += b.area();
    CHECK(dyadic_parent(k) == DyadicCube{0, 0, 0});
    CHECK(dyadic_contains({0, 0, 0}, k));
    CHECK_FALSE(dyadic_contains(k, {0, 0, 0}));
  }
  CHECK(area == 1.0);
  CHECK(corners == std::set<std::pair<double, double>>{{0, 0}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}});
}

TEST_CASE("dyadic ancestry property") {
  Gen g(14);
  const DyadicLattice lat{{-1, -1}, 2.0};
  for (int t = 0; t < 300; ++t) {
    DyadicCube c{0, 0, 0};
    const int depth = g.integer(1, 20);
    std::vector<DyadicCube> path{c};
    for (int d = 0; d < depth; ++d) {
      c = dyadic_children(c)[static_cast<std::size_t>(g.integer(0, 3))];
      path.push_back(c);
    }
    for (const auto& a : path) {
      CHECK(dyadic_contains(a, c));
      CHECK(cube_box(lat, a).contains(cube_box(lat, c)));
    }
    CHECK(cube_side(lat, c.level) == std::ldexp(2.0, -depth));
  }
}

TEST_CASE("spatial index: empty and single box") {
  SpatialIndex empty;
  CHECK(empty.query(Point{0, 0}, 10.0).empty());
  CHECK(empty.query(Box{{-1, -1}, {1, 1}}).empty());
  SpatialIndex one(std::vector<Box>{{{0.5, 0}, {1, 1}}});
  const auto hit = one.query(Point{0, 0.5}, 1.0);
  CHECK(hit == std::vector<std::size_t>{0});
}

TEST_CASE("spatial index on the depth-6 fractal boxes") {
  const auto boxes = ifs_iterate(make_four_corner_ifs(1.0), 6);
  REQUIRE(boxes.size() == 4096);
  SpatialIndex idx(boxes);
  idx.check_invariants();
  const double r = boxes[0].diameter();
  Gen g(15);
  for (int t = 0; t < 200; ++t) {
    const Point p = g.point(-1, 1);
    const auto cand = idx.query(p, r);
    std::set<std::size_t> got(cand.begin(), cand.end());
    std::size_t brute = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (point_box_distance(p, boxes[i]) <= r) {
        ++brute;
        CHECK(got.count(i) == 1);
      }
    CHECK(brute <= 64);
    CHECK(cand.size() <= 64);
  }
}

TEST_CASE("spatial index queries match linear scans") {
  Gen g(16);
  for (int t = 0; t < 20; ++t) {
    std::vector<Box> boxes;
    const int n = g.integer(1, 300);
    for (int i = 0; i < n; ++i) boxes.push_back(g.box(-8, 8, 1.0));
    SpatialIndex idx(boxes);
    idx.check_invariants();
    for (int k = 0; k < 20; ++k) {
      const Box region = g.box(-8, 8, 4.0);
      auto got = idx.query(region);
      std::sort(got.begin(), got.end());
      std::vector<std::size_t> want;
      for (std::size_t i = 0; i < boxes.size(); ++i)
        if (boxes[i].intersects(region)) want.push_back(i);
      CHECK(got == want);

      const Point p = g.point(-10, 10);
      double brute = INFINITY;
      for (const Box& b : boxes) brute = std::min(brute, point_box_distance(p, b));
      const double best = idx.nearest(
          INFINITY, [&](const Box& b) { return point_box_distance(p, b); },
          [&](std::size_t id) { return point_box_distance(p, boxes[id]); });
      CHECK(best == brute);
    }
  }
}
