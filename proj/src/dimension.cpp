#include "qhlab/dimension.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace qhlab {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t cell_key(std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
         static_cast<std::uint32_t>(iy);
}

std::int64_t cell_of(double x, double r) { return static_cast<std::int64_t>(std::floor(x / r)); }

constexpr std::int64_t kMaxCells = std::int64_t{1} << 27;

void add_box_cells(std::unordered_set<std::uint64_t>& cells, const Box& b, double r) {
  const std::int64_t x0 = cell_of(b.lo.x, r), x1 = cell_of(b.hi.x, r);
  const std::int64_t y0 = cell_of(b.lo.y, r), y1 = cell_of(b.hi.y, r);
  if ((x1 - x0 + 1) * (y1 - y0 + 1) > kMaxCells) throw PreconditionError("box count exceeds the cell cap");
  for (std::int64_t i = x0; i <= x1; ++i)
    for (std::int64_t k = y0; k <= y1; ++k) cells.insert(cell_key(i, k));
}

// Cells met by a closed chord: walk the grid lines it crosses and add the
// cells on both sides of each crossing.
void add_chord_cells(std::unordered_set<std::uint64_t>& cells, Point a, Point b, double r) {
  std::vector<double> ts{0.0, 1.0};
  const double dx = b.x - a.x, dy = b.y - a.y;
  auto crossings = [&](double p0, double d) {
    if (d == 0.0) return;
    const double lo = std::min(p0, p0 + d), hi = std::max(p0, p0 + d);
    for (std::int64_t g = cell_of(lo, r) + 1; g * r <= hi; ++g) ts.push_back((g * r - p0) / d);
  };
  crossings(a.x, dx);
  crossings(a.y, dy);
  std::sort(ts.begin(), ts.end());
  for (double t : ts) {
    const double x = a.x + t * dx, y = a.y + t * dy;
    add_box_cells(cells, Box{{x, y}, {x, y}}, r);
  }
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double t = (ts[i] + ts[i + 1]) / 2.0;
    cells.insert(cell_key(cell_of(a.x + t * dx, r), cell_of(a.y + t * dy, r)));
  }
}

double least_squares(const std::vector<double>& x, const std::vector<double>& y, double& intercept, double& rms) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("degenerate series");
  const double slope = sxy / sxx;
  intercept = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - intercept - slope * x[i];
    ss += e * e;
  }
  rms = std::sqrt(ss / n);
  return slope;
}

}  // namespace

Box Primitives::bounds() const {
  Box b = Box::empty();
  for (const auto& x : boxes) b = b.merged(x);
  for (const auto& s : segments) b = b.merged(s.bounds());
  for (const auto& c : chords) b = b.merged(Box{c.a, c.a}).merged(Box{c.b, c.b});
  for (const auto& p : points) b = b.merged(Box{p, p});
  return b;
}

Primitives boundary_primitives(const Domain& d, int circle_sides) {
  Primitives p;
  p.descriptor = "boundary:" + d.provenance().builder;
  p.segments = d.outer_segments();
  p.segments.insert(p.segments.end(), d.walls().begin(), d.walls().end());
  p.boxes = d.holes();
  p.chords = d.boundary_chords(circle_sides);
  return p;
}

Primitives ifs_primitives(const IfsFourCorner& ifs, int depth) {
  Primitives p;
  p.boxes = ifs_iterate(ifs, depth);
  p.descriptor = "ifs:ratio=" + num(ifs.ratio) + ",depth=" + std::to_string(depth);
  return p;
}

std::size_t box_count(const Primitives& set, double r) {
  if (!(r > 0.0)) throw PreconditionError("r must be positive");
  if (set.empty()) return 0;
  const Box b = set.bounds();
  if (r > std::max(b.width(), b.height()) && std::max(b.width(), b.height()) > 0.0)
    throw PreconditionError("r exceeds the bounding box");
  std::unordered_set<std::uint64_t> cells;
  for (const auto& x : set.boxes) add_box_cells(cells, x, r);
  for (const auto& s : set.segments) add_box_cells(cells, s.bounds(), r);
  for (const auto& p : set.points) add_box_cells(cells, Box{p, p}, r);
  for (const auto& c : set.chords) add_chord_cells(cells, c.a, c.b, r);
  return cells.size();
}

BoxCountSeries box_count_series(const Primitives& set, std::vector<double> radii, double lambda) {
  std::sort(radii.begin(), radii.end(), std::greater<>());
  BoxCountSeries s;
  s.descriptor = set.descriptor;
  s.lambda = lambda;
  for (double r : radii) {
    const std::size_t n = box_count(set, r);
    s.points.push_back({r, n, static_cast<double>(n) * kCellBallFactor * std::pow(r, lambda)});
  }
  return s;
}

std::vector<double> dyadic_radii(int levels) {
  std::vector<double> r;
  for (int k = 1; k <= levels; ++k) r.push_back(std::ldexp(1.0, -k));
  return r;
}

DimensionEstimate minkowski_fit(const BoxCountSeries& series) {
  std::vector<BoxCountPoint> pts;
  for (const auto& p : series.points)
    if (p.count > 0) pts.push_back(p);
  if (pts.size() < 4) throw PreconditionError("Minkowski fit needs at least 4 scales");
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.r > b.r; });
  const std::size_t first = pts.size() / 2;
  std::vector<double> x, y;
  for (std::size_t i = first; i < pts.size(); ++i) {
    x.push_back(std::log(1.0 / pts[i].r));
    y.push_back(std::log(static_cast<double>(pts[i].count)));
  }
  DimensionEstimate e;
  e.slope = least_squares(x, y, e.intercept, e.residual);
  e.scale_min = pts.back().r;
  e.scale_max = pts[first].r;
  e.used = x.size();
  return e;
}

DimensionEstimate whitney_dim_estimate(const std::map<int, std::size_t>& census, int max_level) {
  std::vector<std::pair<int, std::size_t>> lv;
  for (const auto& [j, n] : census)
    if (n > 0 && j <= max_level) lv.emplace_back(j, n);
  if (lv.size() < 4) throw PreconditionError("Whitney census needs at least 4 nonzero levels");
  const std::size_t used = std::max<std::size_t>(3, lv.size() / 2);
  std::vector<double> x, y;
  for (std::size_t i = lv.size() - used; i < lv.size(); ++i) {
    x.push_back(lv[i].first);
    y.push_back(std::log2(static_cast<double>(lv[i].second)));
  }
  DimensionEstimate e;
  e.slope = least_squares(x, y, e.intercept, e.residual);
  e.scale_min = x.front();
  e.scale_max = x.back();
  e.used = used;
  return e;
}

Packing greedy_ball_pack(const Primitives& set, double r) {
  if (!(r > 0.0 && r <= 1.0)) throw PreconditionError("r must lie in (0,1]");
  Packing out;
  const double sep = 2.0 * r;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  auto try_accept = [&](Point p) {
    const std::int64_t gx = cell_of(p.x, sep), gy = cell_of(p.y, sep);
    for (std::int64_t i = gx - 1; i <= gx + 1; ++i)
      for (std::int64_t k = gy - 1; k <= gy + 1; ++k) {
        const auto it = grid.find(cell_key(i, k));
        if (it == grid.end()) continue;
        for (std::size_t id : it->second) {
          const Point& c = out.centers[id];
          if (std::hypot(c.x - p.x, c.y - p.y) < sep) return;
        }
      }
    grid[cell_key(gx, gy)].push_back(out.centers.size());
    out.centers.push_back(p);
  };
  auto samples = [&](double lo, double hi) {
    std::vector<double> s;
    const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / r));
    for (std::int64_t i = 0; i <= n; ++i) s.push_back(lo + static_cast<double>(i) * r);
    if (s.back() < hi) s.push_back(hi);
    return s;
  };
  for (const auto& b : set.boxes)
    for (double y : samples(b.lo.y, b.hi.y))
      for (double x : samples(b.lo.x, b.hi.x)) try_accept({x, y});
  for (const auto& sg : set.segments) {
    const Box b = sg.bounds();
    for (double y : samples(b.lo.y, b.hi.y))
      for (double x : samples(b.lo.x, b.hi.x)) try_accept({x, y});
  }
  for (const auto& c : set.chords) {
    const double len = std::hypot(c.b.x - c.a.x, c.b.y - c.a.y);
    for (double t : samples(0.0, len)) {
      const double u = len > 0.0 ? t / len : 0.0;
      try_accept({c.a.x + u * (c.b.x - c.a.x), c.a.y + u * (c.b.y - c.a.y)});
    }
  }
  for (const auto& p : set.points) try_accept(p);
  out.count = out.centers.size();
  return out;
}

void write_boxcount_csv(std::ostream& out, const BoxCountSeries& s) {
  out << "r,N,precontent\n";
  for (const auto& p : s.points) out << num(p.r) << ',' << p.count << ',' << num(p.precontent) << '\n';
}

}  // namespace qhlab
