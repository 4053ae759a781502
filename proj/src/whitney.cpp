#include "qhlab/whitney.hpp"

#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <unordered_set>

namespace qhlab {
namespace {

struct CubeHash {
  std::size_t operator()(const DyadicCube& c) const noexcept {
    std::size_t h = static_cast<std::size_t>(c.level) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::size_t>(c.ix) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(c.iy) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return h;
  }
};

bool hinted(const Domain& domain, const Box& b, double side) {
  const auto& hints = domain.hints();
  if (hints.empty()) return false;
  bool hit = false;
  // Reach is at most 6 sides for every hint this library builds; read it per hint anyway.
  double reach = 0.0;
  for (const auto& h : hints) reach = std::max(reach, h.reach);
  domain.hint_index().visit(b.expanded(reach * side), [&](std::size_t id) {
    const RefinementHint& h = hints[id];
    hit = side > h.min_side && box_box_distance(b, h.axis.bounds()) <= h.reach * side;
    return !hit;
  });
  return hit;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int WhitneyDecomposition::scale_level(std::size_t i) const {
  return cubes[i].cube.level - (std::ilogb(lattice.side));
}

DyadicLattice root_lattice(const Box& bounds) {
  const double extent = std::max(bounds.width(), bounds.height());
  if (!(extent > 0.0) || !std::isfinite(extent)) throw PreconditionError("domain must be bounded with nonempty interior");
  double side = std::exp2(std::ceil(std::log2(extent)));
  while (side < extent) side *= 2.0;
  while (side / 2.0 >= extent) side /= 2.0;
  return {bounds.lo, side};
}

WhitneyDecomposition whitney_decompose(const Domain& domain, int j_max, const WhitneyOptions& opts) {
  if (j_max < 1) throw PreconditionError("J_max must be at least 1");
  if (j_max > 40) throw PreconditionError("J_max exceeds memory cap");
  WhitneyDecomposition w;
  w.lattice = root_lattice(domain.bounds());
  w.max_level = j_max;
  w.provenance = domain.provenance();
  w.provenance.params["whitney.jmax"] = std::to_string(j_max);

  std::vector<DyadicCube> stack{DyadicCube{0, 0, 0}};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const DyadicCube c = stack.back();
    stack.pop_back();
    if (++visited > opts.max_cubes) throw PreconditionError("Whitney subdivision exceeds memory cap");
    const Box b = cube_box(w.lattice, c);
    const double side = b.width();
    const double d = domain.box_boundary_distance(b);
    const Point center = b.center();
    if (d > 0.0) {
      if (!domain.contains(center)) continue;
      if (d >= side * std::numbers::sqrt2) {
        w.cubes.push_back({c, d});
        continue;
      }
    } else if (domain.box_in_hole(b)) {
      continue;
    }
    if (c.level < j_max || (opts.use_hints && hinted(domain, b, side))) {
      for (const auto& child : dyadic_children(c)) stack.push_back(child);
      continue;
    }
    bool meets = d > 0.0 || domain.contains(center);
    for (const Point& p : b.corners()) meets = meets || domain.contains(p);
    if (meets) w.truncated.push_back({c, d});
  }

  std::sort(w.cubes.begin(), w.cubes.end(), [](const WhitneyCube& a, const WhitneyCube& b) { return a.cube < b.cube; });
  std::sort(w.truncated.begin(), w.truncated.end(),
            [](const WhitneyCube& a, const WhitneyCube& b) { return a.cube < b.cube; });
  for (std::size_t i = 0; i < w.cubes.size(); ++i) w.levels[w.scale_level(i)].push_back(i);
  return w;
}

std::map<int, std::size_t> level_counts(const WhitneyDecomposition& w) {
  std::map<int, std::size_t> out;
  for (const auto& [j, ids] : w.levels) out[j] = ids.size();
  return out;
}

SpatialIndex cube_index(const WhitneyDecomposition& w) {
  std::vector<Box> boxes;
  boxes.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) boxes.push_back(w.box(i));
  return SpatialIndex(std::move(boxes));
}

std::ptrdiff_t host_cube(const WhitneyDecomposition& w, const SpatialIndex& index, Point p) {
  std::ptrdiff_t best = -1;
  index.visit(Box{p, p}, [&](std::size_t id) {
    if (best < 0 || static_cast<std::ptrdiff_t>(id) < best) best = static_cast<std::ptrdiff_t>(id);
    return true;
  });
  (void)w;
  return best;
}

WhitneyCheck check_whitney(const WhitneyDecomposition& w, const Domain& domain, std::size_t samples,
                           unsigned long long seed) {
  WhitneyCheck out;
  std::unordered_set<DyadicCube, CubeHash> set;
  set.reserve(w.size() * 2);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double diam = w.side(i) * std::numbers::sqrt2;
    const double d = w.cubes[i].dist;
    if (!(d >= diam && d <= 4.0 * diam)) out.two_sided_bound = false;
    if (!(d > 0.0) || !domain.contains(w.center(i))) out.inside = false;
    if (!set.insert(w.cubes[i].cube).second) out.disjoint = false;
  }
  // Quadtree cubes are nested or interior-disjoint, so disjointness reduces to
  // "no accepted cube has an accepted ancestor".
  for (const auto& wc : w.cubes) {
    DyadicCube c = wc.cube;
    while (c.level > 0) {
      c = dyadic_parent(c);
      if (set.contains(c)) {
        out.disjoint = false;
        break;
      }
    }
  }

  std::vector<Box> dilated;
  dilated.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) dilated.push_back(w.dilated_box(i));
  const SpatialIndex index(std::move(dilated));
  std::mt19937_64 rng(seed);
  const Box bb = domain.bounds();
  std::uniform_real_distribution<double> ux(bb.lo.x, bb.hi.x);
  std::uniform_real_distribution<double> uy(bb.lo.y, bb.hi.y);
  std::size_t tries = 0;
  while (out.samples < samples && tries < 100 * samples) {
    ++tries;
    const Point p{ux(rng), uy(rng)};
    if (!domain.contains(p)) continue;
    ++out.samples;
    std::size_t count = 0;
    index.visit(Box{p, p}, [&](std::size_t) {
      ++count;
      return true;
    });
    out.max_overlap = std::max(out.max_overlap, count);
  }
  return out;
}

CoverageDeficit coverage_deficit(const WhitneyDecomposition& w, const Domain& domain, std::size_t samples,
                                 unsigned long long seed) {
  if (samples == 0) return {};
  const SpatialIndex index = cube_index(w);
  std::mt19937_64 rng(seed);
  const Box bb = domain.bounds();
  std::uniform_real_distribution<double> ux(bb.lo.x, bb.hi.x);
  std::uniform_real_distribution<double> uy(bb.lo.y, bb.hi.y);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Point p{ux(rng), uy(rng)};
    if (domain.contains(p) && host_cube(w, index, p) < 0) ++hits;
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  return {frac * bb.area(), std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples)) * bb.area()};
}

CubeGraph build_cube_graph(const WhitneyDecomposition& w) {
  const std::size_t n = w.size();
  std::vector<Box> dilated;
  dilated.reserve(n);
  for (std::size_t i = 0; i < n; ++i) dilated.push_back(w.dilated_box(i));
  const SpatialIndex index(dilated);

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    index.visit(dilated[i], [&](std::size_t j) {
      if (j > i) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
      return true;
    });
  }
  CubeGraph g;
  g.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    g.offsets[i + 1] = g.offsets[i] + adj[i].size();
  }
  g.targets.reserve(g.offsets[n]);
  for (auto& a : adj) g.targets.insert(g.targets.end(), a.begin(), a.end());
  g.weights.assign(g.targets.size(), 0.0);
  return g;
}

void write_whitney(std::ostream& out, const WhitneyDecomposition& w) {
  out << "whitney v1\n";
  out << "# lattice " << num(w.lattice.origin.x) << ' ' << num(w.lattice.origin.y) << ' ' << num(w.lattice.side)
      << " jmax " << w.max_level << '\n';
  for (const auto& c : w.cubes)
    out << c.cube.level << ' ' << c.cube.ix << ' ' << c.cube.iy << ' ' << num(c.dist) << " 0\n";
  for (const auto& c : w.truncated)
    out << c.cube.level << ' ' << c.cube.ix << ' ' << c.cube.iy << ' ' << num(c.dist) << " 1\n";
}

void write_census_csv(std::ostream& out, const WhitneyDecomposition& w) {
  out << "j,count\n";
  for (const auto& [j, n] : level_counts(w)) out << j << ',' << n << '\n';
}

}  // namespace qhlab
