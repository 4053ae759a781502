// Axis-aligned planar primitives, dyadic cube arithmetic and a static BVH.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhlab {

/// Tolerance used only when classifying points that sit on a wall.
inline constexpr double kGeomEps = 1e-12;

/// A caller-supplied value violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An internal invariant was found broken at runtime.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Closed axis-aligned rectangle [lo.x, hi.x] x [lo.y, hi.y].
struct Box {
  Point lo;
  Point hi;

  static Box around(Point c, double half_w, double half_h) {
    return {{c.x - half_w, c.y - half_h}, {c.x + half_w, c.y + half_h}};
  }
  static Box empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf}, {-inf, -inf}};
  }

  bool valid() const { return lo.x <= hi.x && lo.y <= hi.y; }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }
  double diameter() const { return std::hypot(width(), height()); }
  Point center() const { return {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}; }

  bool contains(Point p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  bool contains_open(Point p) const { return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y; }
  bool contains(const Box& b) const { return b.lo.x >= lo.x && b.hi.x <= hi.x && b.lo.y >= lo.y && b.hi.y <= hi.y; }
  bool intersects(const Box& b) const {
    return lo.x <= b.hi.x && b.lo.x <= hi.x && lo.y <= b.hi.y && b.lo.y <= hi.y;
  }
  /// Open interiors intersect (positive-area overlap).
  bool overlaps_open(const Box& b) const {
    return lo.x < b.hi.x && b.lo.x < hi.x && lo.y < b.hi.y && b.lo.y < hi.y;
  }

  /// Homothetic copy about the center, e.g. dilated(9.0 / 8.0) for Q*.
  Box dilated(double factor) const {
    const Point c = center();
    return around(c, 0.5 * factor * width(), 0.5 * factor * height());
  }
  Box expanded(double margin) const {
    return {{lo.x - margin, lo.y - margin}, {hi.x + margin, hi.y + margin}};
  }
  Box merged(const Box& b) const {
    return {{std::min(lo.x, b.lo.x), std::min(lo.y, b.lo.y)}, {std::max(hi.x, b.hi.x), std::max(hi.y, b.hi.y)}};
  }
  Box merged(Point p) const { return merged(Box{p, p}); }
  std::array<Point, 4> corners() const { return {lo, Point{hi.x, lo.y}, Point{lo.x, hi.y}, hi}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Axis-aligned closed segment.
struct Segment {
  Point a;
  Point b;

  bool horizontal() const { return a.y == b.y; }
  bool vertical() const { return a.x == b.x; }
  double length() const { return distance(a, b); }
  Box bounds() const { return Box{a, a}.merged(b); }

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Builds a segment, rejecting endpoints that differ in both coordinates.
Segment make_segment(Point a, Point b);

/// General (possibly oblique) closed segment; used only for boundary rasterization.
struct Chord {
  Point a;
  Point b;
};

double point_box_distance(Point p, const Box& b);
double point_segment_distance(Point p, const Segment& s);
double box_box_distance(const Box& a, const Box& b);
/// Largest distance from p to a point of b.
double point_box_max_distance(Point p, const Box& b);
/// Closed intersection test for two axis-aligned segments or a segment and a box.
bool segment_intersects_box(const Segment& s, const Box& b);

// ---------------------------------------------------------------------------
// Dyadic cubes

/// The root cube of a dyadic lattice; level-j cubes have side side * 2^-j.
struct DyadicLattice {
  Point origin;
  double side = 1.0;
};

struct DyadicCube {
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
};

inline double cube_side(const DyadicLattice& lat, int level) { return std::ldexp(lat.side, -level); }
Box cube_box(const DyadicLattice& lat, const DyadicCube& c);
std::array<DyadicCube, 4> dyadic_children(const DyadicCube& c);
DyadicCube dyadic_parent(const DyadicCube& c);
/// True when a is b or one of b's dyadic ancestors.
bool dyadic_contains(const DyadicCube& a, const DyadicCube& b);

// ---------------------------------------------------------------------------
// Spatial index

/// Static bounding-volume hierarchy over primitive bounds. Built once by
/// recursive longest-axis median split; primitives are referred to by their
/// position in the input vector.
class SpatialIndex {
 public:
  static constexpr std::size_t kLeafCapacity = 8;

  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<Box> bounds);

  std::size_t size() const { return bounds_.size(); }
  bool empty() const { return bounds_.empty(); }
  const Box& bound(std::size_t id) const { return bounds_[id]; }

  /// Candidate ids whose bound lies within radius of p (superset filter).
  std::vector<std::size_t> query(Point p, double radius) const;
  /// Ids whose closed bound intersects the closed region.
  std::vector<std::size_t> query(const Box& region) const;

  /// Branch-and-bound minimum. lower(Box) must bound exact(id) from below for
  /// every primitive inside the node bound.
  template <class Lower, class Exact>
  double nearest(double best, Lower&& lower, Exact&& exact) const {
    if (nodes_.empty()) return best;
    std::vector<std::uint32_t> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      if (lower(node.bound) >= best) continue;
      if (node.left < 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
          best = std::min(best, static_cast<double>(exact(order_[i])));
        continue;
      }
      const double dl = lower(nodes_[node.left].bound);
      const double dr = lower(nodes_[node.right].bound);
      if (dl <= dr) {
        if (dr < best) stack.push_back(static_cast<std::uint32_t>(node.right));
        if (dl < best) stack.push_back(static_cast<std::uint32_t>(node.left));
      } else {
        if (dl < best) stack.push_back(static_cast<std::uint32_t>(node.left));
        if (dr < best) stack.push_back(static_cast<std::uint32_t>(node.right));
      }
    }
    return best;
  }

  /// Visits every id whose bound intersects region; stops early if f returns false.
  template <class F>
  void visit(const Box& region, F&& f) const {
    if (nodes_.empty()) return;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      if (!node.bound.intersects(region)) continue;
      if (node.left < 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
          if (bounds_[order_[i]].intersects(region) && !f(static_cast<std::size_t>(order_[i]))) return;
        continue;
      }
      stack.push_back(static_cast<std::uint32_t>(node.right));
      stack.push_back(static_cast<std::uint32_t>(node.left));
    }
  }

  /// Throws InvariantError if a leaf holds a primitive twice, a primitive is
  /// missing, or a node bound fails to contain its children.
  void check_invariants() const;

 private:
  struct Node {
    Box bound = Box::empty();
    std::uint32_t first = 0;
    std::uint32_t count = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t first, std::uint32_t count);

  std::vector<Box> bounds_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace qhlab
