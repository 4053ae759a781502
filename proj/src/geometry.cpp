#include "qhlab/geometry.hpp"

#include <numeric>

namespace qhlab {

Segment make_segment(Point a, Point b) {
  const bool same_x = a.x == b.x;
  const bool same_y = a.y == b.y;
  if (same_x == same_y) throw PreconditionError("segment endpoints must differ in exactly one coordinate");
  if ((same_y && a.x > b.x) || (same_x && a.y > b.y)) std::swap(a, b);
  return {a, b};
}

double point_box_distance(Point p, const Box& b) {
  const double dx = std::max({b.lo.x - p.x, 0.0, p.x - b.hi.x});
  const double dy = std::max({b.lo.y - p.y, 0.0, p.y - b.hi.y});
  return std::hypot(dx, dy);
}

double point_segment_distance(Point p, const Segment& s) { return point_box_distance(p, s.bounds()); }

double box_box_distance(const Box& a, const Box& b) {
  const double dx = std::max({b.lo.x - a.hi.x, 0.0, a.lo.x - b.hi.x});
  const double dy = std::max({b.lo.y - a.hi.y, 0.0, a.lo.y - b.hi.y});
  return std::hypot(dx, dy);
}

double point_box_max_distance(Point p, const Box& b) {
  const double dx = std::max(std::abs(p.x - b.lo.x), std::abs(p.x - b.hi.x));
  const double dy = std::max(std::abs(p.y - b.lo.y), std::abs(p.y - b.hi.y));
  return std::hypot(dx, dy);
}

bool segment_intersects_box(const Segment& s, const Box& b) { return s.bounds().intersects(b); }

Box cube_box(const DyadicLattice& lat, const DyadicCube& c) {
  const double s = cube_side(lat, c.level);
  const Point lo{lat.origin.x + static_cast<double>(c.ix) * s, lat.origin.y + static_cast<double>(c.iy) * s};
  return {lo, {lo.x + s, lo.y + s}};
}

std::array<DyadicCube, 4> dyadic_children(const DyadicCube& c) {
  const int j = c.level + 1;
  const std::int64_t x = 2 * c.ix;
  const std::int64_t y = 2 * c.iy;
  return {DyadicCube{j, x, y}, DyadicCube{j, x + 1, y}, DyadicCube{j, x, y + 1}, DyadicCube{j, x + 1, y + 1}};
}

DyadicCube dyadic_parent(const DyadicCube& c) {
  if (c.level == 0) throw PreconditionError("root cube has no parent");
  // Floor division keeps negative indices on the right lattice cell.
  auto half = [](std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); };
  return {c.level - 1, half(c.ix), half(c.iy)};
}

bool dyadic_contains(const DyadicCube& a, const DyadicCube& b) {
  if (a.level > b.level) return false;
  const int shift = b.level - a.level;
  return (b.ix >> shift) == a.ix && (b.iy >> shift) == a.iy;
}

// ---------------------------------------------------------------------------

SpatialIndex::SpatialIndex(std::vector<Box> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) return;
  order_.resize(bounds_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * bounds_.size() / kLeafCapacity + 2);
  build(0, static_cast<std::uint32_t>(bounds_.size()));
}

std::int32_t SpatialIndex::build(std::uint32_t first, std::uint32_t count) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  Box bound = Box::empty();
  Box centroids = Box::empty();
  for (std::uint32_t i = first; i < first + count; ++i) {
    bound = bound.merged(bounds_[order_[i]]);
    centroids = centroids.merged(bounds_[order_[i]].center());
  }
  nodes_[id].bound = bound;
  nodes_[id].first = first;
  nodes_[id].count = count;
  if (count <= kLeafCapacity) return id;

  const bool split_x = centroids.width() >= centroids.height();
  const auto key = [&](std::uint32_t k) {
    const Point c = bounds_[k].center();
    return split_x ? c.x : c.y;
  };
  const std::uint32_t half = count / 2;
  auto begin = order_.begin() + first;
  std::nth_element(begin, begin + half, begin + count, [&](std::uint32_t a, std::uint32_t b) {
    const double ka = key(a);
    const double kb = key(b);
    return ka < kb || (ka == kb && a < b);
  });
  const std::int32_t left = build(first, half);
  const std::int32_t right = build(first + half, count - half);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::size_t> SpatialIndex::query(Point p, double radius) const {
  std::vector<std::size_t> out;
  if (radius < 0) throw PreconditionError("query radius must be nonnegative");
  const Box region = Box{p, p}.expanded(radius);
  visit(region, [&](std::size_t id) {
    if (point_box_distance(p, bounds_[id]) <= radius) out.push_back(id);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SpatialIndex::query(const Box& region) const {
  std::vector<std::size_t> out;
  visit(region, [&](std::size_t id) {
    out.push_back(id);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

void SpatialIndex::check_invariants() const {
  std::vector<int> seen(bounds_.size(), 0);
  for (const Node& n : nodes_) {
    if (n.left < 0) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        ++seen[order_[i]];
        if (!n.bound.contains(bounds_[order_[i]])) throw InvariantError("leaf bound misses a primitive");
      }
    } else if (!n.bound.contains(nodes_[n.left].bound) || !n.bound.contains(nodes_[n.right].bound)) {
      throw InvariantError("node bound misses a child bound");
    }
  }
  for (int s : seen)
    if (s != 1) throw InvariantError("primitive not in exactly one leaf");
}

}  // namespace qhlab
