#include "qhlab/domains.hpp"

#include <cstdio>
#include <numbers>
#include <queue>
#include <set>

#include "qhlab/whitney.hpp"

namespace qhlab {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Box> segment_bounds(const std::vector<Segment>& segs) {
  std::vector<Box> out;
  out.reserve(segs.size());
  for (const auto& s : segs) out.push_back(s.bounds());
  return out;
}

double nearest_box(const SpatialIndex& ix, const std::vector<Box>& prims, Point p, double best) {
  return ix.nearest(
      best, [&](const Box& b) { return point_box_distance(p, b); },
      [&](std::size_t id) { return point_box_distance(p, prims[id]); });
}

double nearest_box(const SpatialIndex& ix, const std::vector<Box>& prims, const Box& q, double best) {
  return ix.nearest(
      best, [&](const Box& b) { return box_box_distance(q, b); },
      [&](std::size_t id) { return box_box_distance(q, prims[id]); });
}

// Boundary of a union of boxes: edges of the coordinate arrangement separating
// an inside cell from an outside one, merged along collinear runs.
struct Arrangement {
  std::vector<double> xs, ys;
  std::vector<char> inside;  // (ys.size()-1) rows of (xs.size()-1)
  std::size_t nx() const { return xs.size() - 1; }
  std::size_t ny() const { return ys.size() - 1; }
  bool in(std::ptrdiff_t i, std::ptrdiff_t j) const {
    if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(nx()) || j >= static_cast<std::ptrdiff_t>(ny())) return false;
    return inside[static_cast<std::size_t>(j) * nx() + static_cast<std::size_t>(i)] != 0;
  }
};

Arrangement arrange(const std::vector<Box>& boxes) {
  Arrangement a;
  for (const auto& b : boxes) {
    a.xs.push_back(b.lo.x);
    a.xs.push_back(b.hi.x);
    a.ys.push_back(b.lo.y);
    a.ys.push_back(b.hi.y);
  }
  std::sort(a.xs.begin(), a.xs.end());
  a.xs.erase(std::unique(a.xs.begin(), a.xs.end()), a.xs.end());
  std::sort(a.ys.begin(), a.ys.end());
  a.ys.erase(std::unique(a.ys.begin(), a.ys.end()), a.ys.end());
  a.inside.assign(a.nx() * a.ny(), 0);
  for (const auto& b : boxes) {
    const auto i0 = std::lower_bound(a.xs.begin(), a.xs.end(), b.lo.x) - a.xs.begin();
    const auto i1 = std::lower_bound(a.xs.begin(), a.xs.end(), b.hi.x) - a.xs.begin();
    const auto j0 = std::lower_bound(a.ys.begin(), a.ys.end(), b.lo.y) - a.ys.begin();
    const auto j1 = std::lower_bound(a.ys.begin(), a.ys.end(), b.hi.y) - a.ys.begin();
    for (auto j = j0; j < j1; ++j)
      for (auto i = i0; i < i1; ++i) a.inside[static_cast<std::size_t>(j) * a.nx() + static_cast<std::size_t>(i)] = 1;
  }
  return a;
}

std::vector<Segment> arrangement_boundary(const Arrangement& a) {
  std::vector<Segment> out;
  const auto nx = static_cast<std::ptrdiff_t>(a.nx());
  const auto ny = static_cast<std::ptrdiff_t>(a.ny());
  // Vertical edges at xs[i], merged in y.
  for (std::ptrdiff_t i = 0; i <= nx; ++i) {
    std::ptrdiff_t start = -1;
    for (std::ptrdiff_t j = 0; j <= ny; ++j) {
      const bool edge = j < ny && a.in(i - 1, j) != a.in(i, j);
      if (edge && start < 0) start = j;
      if (!edge && start >= 0) {
        out.push_back(make_segment({a.xs[i], a.ys[start]}, {a.xs[i], a.ys[j]}));
        start = -1;
      }
    }
  }
  for (std::ptrdiff_t j = 0; j <= ny; ++j) {
    std::ptrdiff_t start = -1;
    for (std::ptrdiff_t i = 0; i <= nx; ++i) {
      const bool edge = i < nx && a.in(i, j - 1) != a.in(i, j);
      if (edge && start < 0) start = i;
      if (!edge && start >= 0) {
        out.push_back(make_segment({a.xs[start], a.ys[j]}, {a.xs[i], a.ys[j]}));
        start = -1;
      }
    }
  }
  return out;
}

bool arrangement_connected(const Arrangement& a) {
  const auto nx = static_cast<std::ptrdiff_t>(a.nx());
  const auto ny = static_cast<std::ptrdiff_t>(a.ny());
  std::vector<char> seen(a.inside.size(), 0);
  std::size_t total = 0;
  std::ptrdiff_t seed = -1;
  for (std::size_t k = 0; k < a.inside.size(); ++k)
    if (a.inside[k]) {
      ++total;
      if (seed < 0) seed = static_cast<std::ptrdiff_t>(k);
    }
  if (seed < 0) return false;
  std::queue<std::ptrdiff_t> q;
  q.push(seed);
  seen[static_cast<std::size_t>(seed)] = 1;
  std::size_t reached = 0;
  while (!q.empty()) {
    const auto k = q.front();
    q.pop();
    ++reached;
    const auto i = k % nx;
    const auto j = k / nx;
    const std::ptrdiff_t di[] = {1, -1, 0, 0};
    const std::ptrdiff_t dj[] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const auto ii = i + di[d];
      const auto jj = j + dj[d];
      if (!a.in(ii, jj)) continue;
      const auto kk = jj * nx + ii;
      if (seen[static_cast<std::size_t>(kk)]) continue;
      seen[static_cast<std::size_t>(kk)] = 1;
      q.push(kk);
    }
  }
  (void)ny;
  return reached == total;
}

// Power of two bringing diam down to at most 4.
double normalizing_scale(double diam) {
  double s = 1.0;
  while (diam * s > 4.0) s *= 0.5;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

IfsFourCorner make_four_corner_ifs(double lambda) {
  if (!(lambda >= 1.0 && lambda < 2.0)) throw PreconditionError("lambda must lie in [1,2)");
  IfsFourCorner ifs;
  ifs.ratio = std::pow(4.0, -1.0 / lambda);
  ifs.kappa = 1.0 - 2.0 * ifs.ratio;
  const double c = ifs.kappa + ifs.ratio;
  ifs.centers = {Point{c, c}, Point{-c, c}, Point{-c, -c}, Point{c, -c}};
  ifs.dimension = -std::log(4.0) / std::log(ifs.ratio);
  return ifs;
}

std::vector<Box> ifs_iterate(const IfsFourCorner& ifs, int depth, std::size_t cap) {
  if (depth < 0) throw PreconditionError("IFS depth must be nonnegative");
  if (depth > 30 || (std::size_t{1} << (2 * depth)) > cap) throw PreconditionError("IFS box count exceeds cap");
  // Each composite map is x -> scale * x + offset.
  std::vector<Point> offsets{Point{0.0, 0.0}};
  double scale = 1.0;
  for (int d = 0; d < depth; ++d) {
    std::vector<Point> next;
    next.reserve(offsets.size() * 4);
    for (const Point& o : offsets)
      for (const Point& z : ifs.centers) next.push_back({o.x + scale * z.x, o.y + scale * z.y});
    offsets = std::move(next);
    scale *= ifs.ratio;
  }
  std::vector<Box> out;
  out.reserve(offsets.size());
  for (const Point& o : offsets)
    out.push_back({{o.x + scale * ifs.base.lo.x, o.y + scale * ifs.base.lo.y},
                   {o.x + scale * ifs.base.hi.x, o.y + scale * ifs.base.hi.y}});
  return out;
}

// ---------------------------------------------------------------------------

void Domain::index_all() {
  union_index_ = SpatialIndex(union_boxes_);
  outer_index_ = SpatialIndex(segment_bounds(outer_segments_));
  hole_index_ = SpatialIndex(holes_);
  wall_index_ = SpatialIndex(segment_bounds(walls_));
  std::vector<Box> hint_bounds;
  for (const auto& h : hints_) hint_bounds.push_back(h.axis.bounds());
  hint_index_ = SpatialIndex(std::move(hint_bounds));
}

Domain Domain::box_union(std::vector<Box> boxes, Provenance prov) {
  if (boxes.empty()) throw PreconditionError("box union needs at least one box");
  for (const auto& b : boxes)
    if (!b.valid() || b.width() <= 0 || b.height() <= 0) throw PreconditionError("box union needs nondegenerate boxes");
  Box bounds = Box::empty();
  for (const auto& b : boxes) bounds = bounds.merged(b);
  const double s = normalizing_scale(bounds.diameter());
  if (s != 1.0) {
    for (auto& b : boxes) b = {{b.lo.x * s, b.lo.y * s}, {b.hi.x * s, b.hi.y * s}};
    bounds = {{bounds.lo.x * s, bounds.lo.y * s}, {bounds.hi.x * s, bounds.hi.y * s}};
  }
  const Arrangement arr = arrange(boxes);
  if (!arrangement_connected(arr)) throw PreconditionError("box union is not connected");

  Domain d;
  d.outer_ = Outer::BoxUnion;
  d.union_boxes_ = std::move(boxes);
  d.outer_segments_ = arrangement_boundary(arr);
  d.bounds_ = bounds;
  d.scale_ = s;
  d.provenance_ = std::move(prov);
  d.provenance_.params.try_emplace("scale", fmt_double(s));
  d.index_all();
  // Bounding-box center when it is a member, else the center of the largest box.
  d.distinguished_ = bounds.center();
  if (!d.contains(d.distinguished_)) {
    const auto it = std::max_element(d.union_boxes_.begin(), d.union_boxes_.end(),
                                     [](const Box& a, const Box& b) { return a.area() < b.area(); });
    d.distinguished_ = it->center();
  }
  return d;
}

Domain Domain::disc_minus_holes(Circle disc, std::vector<Box> holes, Provenance prov) {
  if (!(disc.radius > 0) || disc.sign != 1) throw PreconditionError("disc must have positive radius and sign +1");
  Domain d;
  d.outer_ = Outer::Disc;
  d.disc_ = disc;
  d.holes_ = std::move(holes);
  d.bounds_ = Box::around(disc.center, disc.radius, disc.radius);
  const double s = normalizing_scale(2.0 * disc.radius);
  if (s != 1.0) {
    d.disc_->center = {disc.center.x * s, disc.center.y * s};
    d.disc_->radius *= s;
    for (auto& b : d.holes_) b = {{b.lo.x * s, b.lo.y * s}, {b.hi.x * s, b.hi.y * s}};
    d.bounds_ = Box::around(d.disc_->center, d.disc_->radius, d.disc_->radius);
  }
  d.scale_ = s;
  d.provenance_ = std::move(prov);
  d.provenance_.params.try_emplace("scale", fmt_double(s));
  d.distinguished_ = d.disc_->center;
  d.index_all();
  return d;
}

Domain Domain::with_walls(std::vector<Segment> walls, std::vector<RefinementHint> hints, Provenance prov) const {
  Domain d = *this;
  d.walls_.insert(d.walls_.end(), walls.begin(), walls.end());
  d.hints_.insert(d.hints_.end(), hints.begin(), hints.end());
  d.provenance_ = std::move(prov);
  d.index_all();
  return d;
}

double Domain::outer_distance(Point p) const {
  if (outer_ == Outer::Disc) return disc_->radius - distance(p, disc_->center);
  return outer_segments_.empty() ? std::numeric_limits<double>::infinity()
                                 : outer_index_.nearest(
                                       std::numeric_limits<double>::infinity(),
                                       [&](const Box& b) { return point_box_distance(p, b); },
                                       [&](std::size_t id) { return point_segment_distance(p, outer_segments_[id]); });
}

double Domain::outer_box_distance(const Box& b) const {
  if (outer_ == Outer::Disc) {
    const double far = point_box_max_distance(disc_->center, b);
    if (far <= disc_->radius) return disc_->radius - far;
    const double near = point_box_distance(disc_->center, b);
    return near >= disc_->radius ? near - disc_->radius : 0.0;
  }
  return outer_index_.nearest(
      std::numeric_limits<double>::infinity(), [&](const Box& q) { return box_box_distance(b, q); },
      [&](std::size_t id) { return box_box_distance(b, outer_segments_[id].bounds()); });
}

bool Domain::contains(Point p) const {
  if (outer_ == Outer::Disc) {
    if (!(distance(p, disc_->center) < disc_->radius)) return false;
  } else {
    bool in_union = false;
    union_index_.visit(Box{p, p}, [&](std::size_t) {
      in_union = true;
      return false;
    });
    if (!in_union || !(outer_distance(p) > 0.0)) return false;
  }
  bool in_hole = false;
  hole_index_.visit(Box{p, p}, [&](std::size_t) {
    in_hole = true;
    return false;
  });
  if (in_hole) return false;
  if (!walls_.empty()) {
    bool on_wall = false;
    wall_index_.visit(Box{p, p}.expanded(kGeomEps), [&](std::size_t id) {
      on_wall = point_segment_distance(p, walls_[id]) <= kGeomEps;
      return !on_wall;
    });
    if (on_wall) return false;
  }
  return true;
}

double Domain::boundary_distance(Point p) const {
  if (!contains(p)) return 0.0;
  double best = outer_distance(p);
  best = nearest_box(hole_index_, holes_, p, best);
  if (!walls_.empty())
    best = wall_index_.nearest(
        best, [&](const Box& b) { return point_box_distance(p, b); },
        [&](std::size_t id) { return point_segment_distance(p, walls_[id]); });
  return best;
}

double Domain::box_boundary_distance(const Box& b) const {
  double best = outer_box_distance(b);
  if (best <= 0.0) return 0.0;
  best = nearest_box(hole_index_, holes_, b, best);
  if (!walls_.empty())
    best = wall_index_.nearest(
        best, [&](const Box& q) { return box_box_distance(b, q); },
        [&](std::size_t id) { return box_box_distance(b, walls_[id].bounds()); });
  return best;
}

bool Domain::box_in_hole(const Box& b) const {
  bool inside = false;
  hole_index_.visit(b, [&](std::size_t id) {
    inside = holes_[id].contains(b);
    return !inside;
  });
  return inside;
}

bool Domain::segment_blocked(const Segment& s) const {
  const Box sb = s.bounds();
  if (outer_ == Outer::Disc) {
    if (!(distance(s.a, disc_->center) < disc_->radius && distance(s.b, disc_->center) < disc_->radius)) return true;
  } else {
    bool hit = false;
    outer_index_.visit(sb, [&](std::size_t) {
      hit = true;
      return false;
    });
    if (hit) return true;
  }
  bool hit = false;
  hole_index_.visit(sb, [&](std::size_t) {
    hit = true;
    return false;
  });
  if (hit) return true;
  wall_index_.visit(sb, [&](std::size_t) {
    hit = true;
    return false;
  });
  return hit;
}

std::vector<Box> Domain::boundary_boxes() const {
  std::vector<Box> out;
  for (const auto& s : outer_segments_) out.push_back(s.bounds());
  out.insert(out.end(), holes_.begin(), holes_.end());
  for (const auto& s : walls_) out.push_back(s.bounds());
  return out;
}

std::vector<Chord> Domain::boundary_chords(int circle_sides) const {
  std::vector<Chord> out;
  if (!disc_) return out;
  const auto& c = *disc_;
  for (int k = 0; k < circle_sides; ++k) {
    const double t0 = 2.0 * std::numbers::pi * k / circle_sides;
    const double t1 = 2.0 * std::numbers::pi * (k + 1) / circle_sides;
    out.push_back({{c.center.x + c.radius * std::cos(t0), c.center.y + c.radius * std::sin(t0)},
                   {c.center.x + c.radius * std::cos(t1), c.center.y + c.radius * std::sin(t1)}});
  }
  return out;
}

// ---------------------------------------------------------------------------

Domain build_disk_minus_fractal(double lambda, int depth) {
  const IfsFourCorner ifs = make_four_corner_ifs(lambda);
  Provenance prov{"four-corner", {{"lambda", fmt_double(lambda)}, {"depth", std::to_string(depth)},
                                  {"kappa", fmt_double(ifs.kappa)}, {"ratio", fmt_double(ifs.ratio)}}};
  return Domain::disc_minus_holes(Circle{{0.0, 0.0}, 2.0, 1}, ifs_iterate(ifs, depth), std::move(prov));
}

Domain build_box_union(const std::vector<Box>& boxes) {
  Provenance prov{"box-union", {{"boxes", std::to_string(boxes.size())}}};
  return Domain::box_union(boxes, std::move(prov));
}

Domain unit_square() {
  Domain d = Domain::box_union({Box{{0.0, 0.0}, {1.0, 1.0}}}, Provenance{"square", {}});
  return d;
}

Domain l_shape() {
  return Domain::box_union({Box{{0.0, 0.0}, {2.0, 1.0}}, Box{{0.0, 1.0}, {1.0, 2.0}}}, Provenance{"l-shape", {}});
}

// ---------------------------------------------------------------------------

ApartmentGeometry apartment_geometry(Point c, double side, double beta) {
  if (!(side > 0.0) || side > 4.0) throw PreconditionError("apartment cube side must lie in (0,4]");
  if (!(beta > 0.0 && beta <= 1.0)) throw PreconditionError("beta must lie in (0,1]");
  ApartmentGeometry a;
  a.center = c;
  a.side = side;
  a.beta = beta;
  const double e = side / 8.0;
  const double w = std::pow(e, 1.0 / beta);
  a.passage_half_width = w;
  a.room = Box::around(c, e, e);
  a.passage = {{c.x - w, c.y + e}, {c.x + w, c.y + e + w}};
  a.long_passage = {{c.x - w, c.y}, {c.x + w, c.y + side / 2.0}};
  a.envelope = Box::around(c, 3.0 * e, 3.0 * e);

  const double lo = c.y - e;
  const double top = c.y + e;
  auto add = [&](Point p, Point q) {
    if (p != q) a.walls.push_back(make_segment(p, q));
  };
  add({c.x - e, lo}, {c.x + e, lo});
  add({c.x - e, lo}, {c.x - e, top});
  add({c.x + e, lo}, {c.x + e, top});
  add({c.x - e, top}, {c.x - w, top});
  add({c.x + w, top}, {c.x + e, top});
  add({c.x - w, top}, {c.x - w, top + w});
  add({c.x + w, top}, {c.x + w, top + w});
  return a;
}

BetaVersionDomain build_beta_version(const Domain& base, const WhitneyDecomposition& w, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw PreconditionError("beta must lie in (0,1]");
  BetaVersionDomain out;
  out.beta = beta;
  out.base_levels = w.max_level;
  std::vector<Segment> walls;
  std::vector<RefinementHint> hints;
  out.apartments.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    ApartmentGeometry a = apartment_geometry(w.center(i), w.side(i), beta);
    walls.insert(walls.end(), a.walls.begin(), a.walls.end());
    const double hw = a.passage_half_width;
    if (hw >= kMinHintWidth) {
      const Point door{a.center.x, a.room.hi.y};
      hints.push_back({make_segment(door, {door.x, door.y + hw}), hw / 8.0, kHintReach});
    }
    out.apartments.push_back(std::move(a));
  }
  Provenance prov{"beta-version", {}};
  for (const auto& [k, v] : base.provenance().params) prov.params["base." + k] = v;
  prov.params["base.builder"] = base.provenance().builder;
  prov.params["base.whitney_jmax"] = std::to_string(w.max_level);
  prov.params["base.whitney"] = "qhlab top-down dyadic, closed-cube distance";
  prov.params["beta"] = fmt_double(beta);
  out.domain = base.with_walls(std::move(walls), std::move(hints), std::move(prov));
  return out;
}

}  // namespace qhlab
