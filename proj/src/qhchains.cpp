#include "qhlab/qhchains.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>

#include "qhlab/parallel.hpp"

namespace qhlab {
namespace {

constexpr int kDim = 2;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using QueueItem = std::pair<double, std::size_t>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

void require_weights(const CubeGraph& g) {
  if (g.node_dist.size() != g.size()) throw PreconditionError("cube graph has no quasihyperbolic weights");
}

}  // namespace

void qh_edge_weights(CubeGraph& g, const WhitneyDecomposition& w, const Domain& domain) {
  const std::size_t n = g.size();
  g.node_dist.resize(n);
  parallel_blocks(n, 64, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) g.node_dist[i] = domain.boundary_distance(w.center(i));
  });
  for (std::size_t i = 0; i < n; ++i) {
    const Point xi = w.center(i);
    for (std::size_t k = g.offsets[i]; k < g.offsets[i + 1]; ++k) {
      const std::size_t j = g.targets[k];
      const Point xj = w.center(j);
      g.weights[k] = std::hypot(xi.x - xj.x, xi.y - xj.y) / ((g.node_dist[i] + g.node_dist[j]) / 2.0);
    }
  }
}

double qh_distance(const CubeGraph& g, const WhitneyDecomposition& w, const Domain& domain,
                   const SpatialIndex& cubes, Point x, Point y) {
  require_weights(g);
  if (x == y) return 0.0;
  const std::ptrdiff_t hx = host_cube(w, cubes, x);
  const std::ptrdiff_t hy = host_cube(w, cubes, y);
  if (hx < 0 || hy < 0) throw PreconditionError("point lies outside every accepted cube");
  const double dx = domain.boundary_distance(x);
  const double dy = domain.boundary_distance(y);
  if (hx == hy) return std::hypot(x.x - y.x, x.y - y.y) / ((dx + dy) / 2.0);

  const auto src = static_cast<std::size_t>(std::min(hx, hy));
  const auto dst = static_cast<std::size_t>(std::max(hx, hy));
  std::vector<double> dist(g.size(), kUnreachable);
  MinQueue pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  double path = kUnreachable;
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == dst) {
      path = d;
      break;
    }
    const auto nb = g.neighbors(u);
    const auto wt = g.neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double nd = d + wt[k];
      if (nd < dist[nb[k]]) {
        dist[nb[k]] = nd;
        pq.push({nd, nb[k]});
      }
    }
  }
  const Point cx = w.center(static_cast<std::size_t>(hx));
  const Point cy = w.center(static_cast<std::size_t>(hy));
  const double ex = std::hypot(x.x - cx.x, x.y - cx.y) / dx;
  const double ey = std::hypot(y.x - cy.x, y.y - cy.y) / dy;
  return path + (ex + ey);
}

std::size_t base_cube(const WhitneyDecomposition& w, Point p) {
  // Cubes are sorted by (level, ix, iy), so the first hit is the answer.
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w.box(i).contains(p)) return i;
  throw PreconditionError("distinguished point lies in no accepted cube");
}

std::vector<std::size_t> ChainTree::chain(std::size_t q) const {
  std::vector<std::size_t> out;
  if (!contains(q)) return out;
  for (std::ptrdiff_t c = static_cast<std::ptrdiff_t>(q); c >= 0; c = parent[static_cast<std::size_t>(c)])
    out.push_back(static_cast<std::size_t>(c));
  std::reverse(out.begin(), out.end());
  return out;
}

ChainTree chain_tree(const CubeGraph& g, const WhitneyDecomposition& w, std::size_t q0) {
  require_weights(g);
  const std::size_t n = g.size();
  if (q0 >= n) throw PreconditionError("base cube is not in the decomposition");
  ChainTree t;
  t.root = q0;
  t.base_point = w.center(q0);
  t.khat.assign(n, kUnreachable);
  t.parent.assign(n, -1);
  t.length.assign(n, -1);

  std::vector<std::ptrdiff_t> dparent(n, -1);
  std::vector<char> settled(n, 0);
  MinQueue pq;
  t.khat[q0] = 0.0;
  pq.push({0.0, q0});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (settled[u] || d > t.khat[u]) continue;
    settled[u] = 1;
    t.order.push_back(u);
    const auto nb = g.neighbors(u);
    const auto wt = g.neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const std::size_t v = nb[k];
      if (settled[v]) continue;
      const double nd = d + wt[k];
      if (nd < t.khat[v] || (nd == t.khat[v] && static_cast<std::ptrdiff_t>(u) < dparent[v])) {
        const bool improved = nd < t.khat[v];
        t.khat[v] = nd;
        dparent[v] = static_cast<std::ptrdiff_t>(u);
        if (improved) pq.push({nd, v});
      }
    }
  }

  // Shortcut in settle order; every ancestor is final before its descendants.
  t.length[q0] = 0;
  std::vector<std::size_t> path;
  for (std::size_t idx = 1; idx < t.order.size(); ++idx) {
    const std::size_t v = t.order[idx];
    const Box dv = w.dilated_box(v);
    path.clear();
    for (std::ptrdiff_t c = dparent[v]; c >= 0; c = t.parent[static_cast<std::size_t>(c)])
      path.push_back(static_cast<std::size_t>(c));
    std::size_t pick = path.front();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      if (w.dilated_box(*it).intersects(dv)) {
        pick = *it;
        break;
      }
    }
    t.parent[v] = static_cast<std::ptrdiff_t>(pick);
    t.length[v] = t.length[pick] + 1;
  }

  t.child_offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (t.parent[i] >= 0) ++t.child_offsets[static_cast<std::size_t>(t.parent[i]) + 1];
  for (std::size_t i = 0; i < n; ++i) t.child_offsets[i + 1] += t.child_offsets[i];
  t.children.resize(t.child_offsets[n]);
  std::vector<std::size_t> fill(t.child_offsets.begin(), t.child_offsets.end() - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (t.parent[i] >= 0) t.children[fill[static_cast<std::size_t>(t.parent[i])]++] = i;
  return t;
}

bool check_chain_condition(const ChainTree& t, const WhitneyDecomposition& w) {
  // Ancestors' chains satisfy the condition by induction, so each cube only
  // has to meet its parent and miss every earlier ancestor.
  for (std::size_t v : t.order) {
    if (v == t.root) continue;
    const Box dv = w.dilated_box(v);
    auto p = static_cast<std::size_t>(t.parent[v]);
    if (!w.dilated_box(p).intersects(dv)) return false;
    if (t.length[v] != t.length[p] + 1) return false;
    for (std::ptrdiff_t c = t.parent[p]; c >= 0; c = t.parent[static_cast<std::size_t>(c)])
      if (w.dilated_box(static_cast<std::size_t>(c)).intersects(dv)) return false;
  }
  return true;
}

std::vector<double> shadow_measures(const ChainTree& t, const WhitneyDecomposition& w) {
  std::vector<double> m(t.size(), 0.0);
  for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
    m[*it] += w.area(*it);
    if (t.parent[*it] >= 0) m[static_cast<std::size_t>(t.parent[*it])] += m[*it];
  }
  return m;
}

std::vector<std::size_t> shadow_cubes(const ChainTree& t, std::size_t q) {
  std::vector<std::size_t> out;
  if (!t.contains(q)) return out;
  std::vector<std::size_t> stack{q};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (std::size_t c : t.children_of(u)) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ShadowStats classify_levels(const ChainTree& t, const WhitneyDecomposition& w, double beta, double lambda) {
  if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
  beta = std::min(beta, 1.0);
  ShadowStats s;
  s.beta = beta;
  s.measure = shadow_measures(t, w);
  s.level.assign(t.size(), 0);
  s.k.assign(t.size(), -1);
  for (std::size_t i = 0; i < t.size(); ++i) s.level[i] = w.scale_level(i);

  double sigma = 1.0;
  for (std::size_t i : t.order) sigma = std::max(sigma, s.measure[i] * std::exp2(s.level[i] * kDim * beta));
  s.sigma = sigma;

  constexpr double tol = 1e-12;
  for (std::size_t i : t.order) {
    const int j = s.level[i];
    const double m = s.measure[i];
    const int natural = static_cast<int>(std::floor(j + std::log2(m) / kDim + tol));
    const int cap = static_cast<int>(std::floor(j - j * beta + tol));
    const int k = std::min(natural, cap);
    const bool lower = std::exp2(-(j - k) * kDim) <= m * (1.0 + tol);
    const bool upper = m <= sigma * std::exp2(-(j - k - 1) * kDim) * (1.0 + tol);
    if (k < 0 || !lower || !upper) {
      ++s.violations;
      continue;
    }
    s.k[i] = k;
    ++s.classified;
    ++s.class_counts[{j, k}];
  }
  for (const auto& [jk, count] : s.class_counts) {
    const auto [j, k] = jk;
    if (j < 1) continue;
    const double bound = j * std::exp2(kDim * (j - k) + j * beta * (lambda - kDim));
    s.counting_ratio = std::max(s.counting_ratio, static_cast<double>(count) / bound);
  }
  return s;
}

QhbcFit qhbc_fit(const ChainTree& t, const CubeGraph& g) {
  require_weights(g);
  QhbcFit f;
  double sx = 0, sy = 0;
  for (std::size_t i : t.order) {
    const double d = g.node_dist[i];
    if (!(d < 1.0) || !(d > 0.0)) continue;
    f.rows.push_back({i, std::log(1.0 / d), t.khat[i], 0.0});
    sx += f.rows.back().log_inv_dist;
    sy += f.rows.back().khat;
  }
  f.used = f.rows.size();
  if (f.used < 10) throw PreconditionError("QHBC fit needs at least 10 cubes with dist < 1");
  const double mx = sx / static_cast<double>(f.used);
  const double my = sy / static_cast<double>(f.used);
  double sxx = 0, sxy = 0;
  for (const auto& r : f.rows) {
    sxx += (r.log_inv_dist - mx) * (r.log_inv_dist - mx);
    sxy += (r.log_inv_dist - mx) * (r.khat - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("degenerate regression: all distances equal");
  f.slope = sxy / sxx;
  if (!(f.slope > 0.0)) throw PreconditionError("degenerate regression: nonpositive slope");
  f.intercept = my - f.slope * mx;
  f.beta = 1.0 / f.slope;
  f.c = -std::numeric_limits<double>::infinity();
  for (const auto& r : f.rows) f.c = std::max(f.c, r.khat - f.slope * r.log_inv_dist);
  for (auto& r : f.rows) r.residual = r.khat - f.slope * r.log_inv_dist - f.c;
  return f;
}

std::vector<double> shadow_sums(const ChainTree& t, const WhitneyDecomposition& w, double q) {
  if (!(q >= 1.0)) throw PreconditionError("q must be at least 1");
  std::vector<double> s(t.size(), 0.0);
  for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
    const std::size_t u = *it;
    s[u] += std::pow(static_cast<double>(t.length[u]), q - 1.0) * w.area(u);
    if (t.parent[u] >= 0) s[static_cast<std::size_t>(t.parent[u])] += s[u];
  }
  return s;
}

ShadowSumRatio shadow_sum_ratio(const ChainTree& t, const WhitneyDecomposition& w, double q, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0,1)");
  const auto sums = shadow_sums(t, w, q);
  const auto meas = shadow_measures(t, w);
  ShadowSumRatio r;
  for (std::size_t a : t.order) {
    const double v = sums[a] / std::pow(meas[a], 1.0 - eps);
    if (v > r.max_ratio) r = {v, a};
  }
  return r;
}

SigmaSeries sigma_chain_sum(const ChainTree& t, const WhitneyDecomposition& w, double q, double p,
                            const std::vector<int>& group) {
  if (!(q >= 1.0)) throw PreconditionError("q must be at least 1");
  if (!(p > q)) throw PreconditionError("p must exceed q");
  if (!group.empty() && group.size() != t.size()) throw PreconditionError("group vector size mismatch");
  const auto sums = shadow_sums(t, w, q);
  const double expo = q / kDim - q / p;
  const double outer = p / (p - q);
  std::map<int, double> inc;
  for (std::size_t a : t.order) {
    const int key = group.empty() ? w.scale_level(a) : group[a];
    inc[key] += std::pow(sums[a] * std::pow(w.area(a), expo), outer);
  }
  SigmaSeries s;
  for (const auto& [j, v] : inc) {
    s.levels.push_back(j);
    s.increments.push_back(v);
    s.total += v;
    s.partial_sums.push_back(s.total);
  }
  const std::size_t m = s.increments.size();
  if (m >= 3) s.decay_ratio = std::sqrt(s.increments[m - 1] / s.increments[m - 3]);
  else if (m == 2) s.decay_ratio = s.increments[1] / s.increments[0];
  return s;
}

std::vector<int> apartment_groups(const WhitneyDecomposition& w, const WhitneyDecomposition& base) {
  if (base.size() == 0) throw PreconditionError("base decomposition is empty");
  const SpatialIndex index = cube_index(base);
  std::vector<int> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Point x = w.center(i);
    std::size_t pick = base.size();
    double best_d = kUnreachable;
    index.nearest(
        kUnreachable, [&](const Box& b) { return point_box_distance(x, b); },
        [&](std::size_t id) {
          const double d = point_box_distance(x, base.box(id));
          if (d < best_d || (d == best_d && id < pick)) {
            best_d = d;
            pick = id;
          }
          return d;
        });
    out[i] = base.scale_level(pick);
  }
  return out;
}

double john_constant_estimate(const ChainTree& t, const WhitneyDecomposition& w, const CubeGraph& g,
                              const Domain& domain) {
  require_weights(g);
  // Per edge to the parent: pieces (far end measured from the child, certified
  // lower bound of dist on the piece) from the 1-Lipschitz property.
  struct Piece {
    double s_end;
    double lb;
  };
  const std::size_t n = t.size();
  std::vector<std::size_t> off(n + 1, 0);
  std::vector<std::vector<Piece>> pieces(n);
  parallel_blocks(n, 64, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t v = b; v < e; ++v) {
      if (!t.contains(v) || v == t.root) continue;
      const auto u = static_cast<std::size_t>(t.parent[v]);
      const Point a = w.center(v), c = w.center(u);
      const double len = std::hypot(c.x - a.x, c.y - a.y);
      const double dmin = std::min(g.node_dist[v], g.node_dist[u]);
      const int k = std::clamp(static_cast<int>(std::ceil(4.0 * len / dmin)), 1, 64);
      double prev = g.node_dist[v];
      for (int i = 1; i <= k; ++i) {
        const double s = len * i / k;
        const double d = i == k ? g.node_dist[u]
                                : domain.boundary_distance({a.x + (c.x - a.x) * i / k, a.y + (c.y - a.y) * i / k});
        pieces[v].push_back({s, std::max(0.0, (prev + d - len / k) / 2.0)});
        prev = d;
      }
    }
  });
  std::vector<double> len(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    if (!pieces[v].empty()) len[v] = pieces[v].back().s_end;

  std::vector<double> block_min(64, 1.0);
  parallel_blocks(t.order.size(), 64, [&](std::size_t b, std::size_t e, std::size_t blk) {
    double best = 1.0;
    for (std::size_t idx = b; idx < e; ++idx) {
      double tt = 0.0;
      for (std::size_t v = t.order[idx]; v != t.root; v = static_cast<std::size_t>(t.parent[v])) {
        for (const Piece& pc : pieces[v]) best = std::min(best, pc.lb / (tt + pc.s_end));
        tt += len[v];
      }
    }
    block_min[blk] = best;
  });
  return *std::min_element(block_min.begin(), block_min.end());
}

ChainConstants chain_constants(const ChainTree& t, const WhitneyDecomposition& w, double beta) {
  ChainConstants c;
  std::map<int, int> counts;
  for (std::size_t r : t.order) {
    counts.clear();
    for (std::ptrdiff_t q = static_cast<std::ptrdiff_t>(r); q >= 0; q = t.parent[static_cast<std::size_t>(q)])
      ++counts[w.scale_level(static_cast<std::size_t>(q))];
    for (const auto& [j, cnt] : counts)
      if (j >= 1) c.eks = std::max(c.eks, static_cast<double>(cnt) / j);
    const double l = t.length[r];
    c.h61_upper = std::max(c.h61_upper, l / (t.khat[r] + 1.0));
    c.h61_lower = std::max(c.h61_lower, t.khat[r] / (l + 1.0));
  }
  std::vector<Box> hull(t.size(), Box::empty());
  for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
    hull[*it] = hull[*it].merged(w.box(*it));
    if (t.parent[*it] >= 0) {
      auto& ph = hull[static_cast<std::size_t>(t.parent[*it])];
      ph = ph.merged(hull[*it]);
    }
  }
  for (std::size_t q : t.order) {
    const double dq = w.side(q) * std::numbers::sqrt2;
    c.shadow_diam = std::max(c.shadow_diam, hull[q].diameter() / std::pow(dq, beta));
  }
  return c;
}

void write_chains_csv(std::ostream& out, const ChainTree& t, const WhitneyDecomposition& w, const CubeGraph& g) {
  out << "id,j,ell,khat,dist\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.contains(i)) continue;
    out << i << ',' << w.scale_level(i) << ',' << t.length[i] << ',' << num(t.khat[i]) << ','
        << num(g.node_dist[i]) << '\n';
  }
}

void write_shadows_csv(std::ostream& out, const ShadowStats& s, const ChainTree& t) {
  out << "id,shadow,k\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.contains(i)) continue;
    out << i << ',' << num(s.measure[i]) << ',' << s.k[i] << '\n';
  }
}

void write_qhbc_csv(std::ostream& out, const QhbcFit& f) {
  out << "id,log_inv_dist,khat,residual\n";
  for (const auto& r : f.rows)
    out << r.id << ',' << num(r.log_inv_dist) << ',' << num(r.khat) << ',' << num(r.residual) << '\n';
}

void write_sigma_csv(std::ostream& out, const SigmaSeries& s) {
  out << "j,increment,partial_sum\n";
  for (std::size_t i = 0; i < s.levels.size(); ++i)
    out << s.levels[i] << ',' << num(s.increments[i]) << ',' << num(s.partial_sums[i]) << '\n';
}

}  // namespace qhlab
