#include "qhlab/poincare.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "qhlab/dimension.hpp"

namespace qhlab {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void validate_common(double q, double lambda, double beta, int n) {
  if (n < 2) throw PreconditionError("n must be at least 2");
  if (!(q >= 1.0)) throw PreconditionError("q must be at least 1");
  if (!(lambda >= n - 1 && lambda < n)) throw PreconditionError("lambda must lie in [n-1,n)");
  if (!(beta > 0.0 && beta <= 1.0)) throw PreconditionError("beta must lie in (0,1]");
}

}  // namespace

double threshold_p0(double q, double lambda, double beta, int n) {
  validate_common(q, lambda, beta, n);
  const double den = q + beta * (n - lambda);
  if (!(den > 0.0)) throw InvariantError("threshold denominator is not positive");
  return q * (n - lambda * beta) / den;
}

MonotonicityCheck p0_monotonicity_check(double q, double beta, int n, std::vector<double> lambdas) {
  if (!(q < n - n * beta)) throw PreconditionError("monotonicity is only asserted for q < n - n beta");
  std::sort(lambdas.begin(), lambdas.end());
  MonotonicityCheck c;
  c.min_increment = std::numeric_limits<double>::infinity();
  for (double l : lambdas) c.values.push_back(threshold_p0(q, l, beta, n));
  for (std::size_t i = 1; i < c.values.size(); ++i) {
    const double d = c.values[i] - c.values[i - 1];
    c.min_increment = std::min(c.min_increment, d);
    if (!(d > 0.0)) c.pass = false;
  }
  if (c.values.size() < 2) c.min_increment = 0.0;
  return c;
}

// ---------------------------------------------------------------------------

void TestFunctionSpec::validate() const {
  validate_common(q, lambda, beta, n);
  if (n != 2) throw PreconditionError("test functions are planar");
  if (!(side > 0.0 && side <= 4.0)) throw PreconditionError("cube side must lie in (0,4]");
}

double TestFunctionSpec::value() const { return std::pow(side, (lambda - n) / q); }

double TestFunctionSpec::gradient() const {
  return std::pow(8.0, 1.0 / beta) * std::pow(side, (lambda - n) / q - 1.0 / beta);
}

double TestFunctionSpec::passage_width() const { return std::pow(side / 8.0, 1.0 / beta); }

Box TestFunctionSpec::room() const { return Box::around(center, side / 8.0, side / 8.0); }

Box TestFunctionSpec::passage() const {
  const double w = passage_width();
  const double y0 = center.y + side / 8.0;
  return {{center.x - w, y0}, {center.x + w, y0 + w}};
}

double TestFunctionSpec::eval(Point x) const {
  if (room().contains(x)) return value();
  const Box p = passage();
  if (p.contains(x)) return value() * (1.0 - (x.y - p.lo.y) / passage_width());
  return 0.0;
}

TestFunctionNorms test_function_norms(const TestFunctionSpec& spec, double p) {
  spec.validate();
  if (!(p >= 1.0)) throw PreconditionError("p must be at least 1");
  TestFunctionNorms out;
  const int n = spec.n;
  const double w = spec.passage_width();
  out.room = std::pow(4.0, -n) * std::pow(spec.side, spec.lambda);
  out.passage = std::pow(spec.value(), spec.q) * (2.0 * w * w) / (spec.q + 1.0);
  out.lq = out.room + out.passage;
  out.grad_p = std::pow(spec.gradient(), p) * std::pow(2.0, n - 1) * std::pow(spec.side / 8.0, n / spec.beta);
  return out;
}

// ---------------------------------------------------------------------------

CounterexamplePlan build_counterexample_plan(const WhitneyDecomposition& base, double lambda, int m_max,
                                             bool extrapolate) {
  if (m_max < 1) throw PreconditionError("m_max must be at least 1");
  if (!(lambda >= 1.0 && lambda < 2.0)) throw PreconditionError("lambda must lie in [1,2)");
  const auto census = level_counts(base);
  CounterexamplePlan plan;
  plan.lambda = lambda;
  auto first = std::find_if(census.begin(), census.end(), [](const auto& e) { return e.second >= 2; });
  if (first == census.end()) throw PreconditionError("census has no level with two cubes");
  plan.k0 = first->first;
  const int last_measured = census.rbegin()->first;
  if (extrapolate) {
    const DimensionEstimate e = whitney_dim_estimate(census, last_measured);
    plan.census_slope = e.slope;
    plan.census_intercept = e.intercept;
  }

  const int j_cap = plan.k0 + 64 * m_max + 64;
  for (int j = plan.k0; j <= j_cap && static_cast<int>(plan.levels.size()) < m_max; ++j) {
    const bool measured = j <= last_measured;
    if (!measured && !extrapolate) break;
    double count = 0.0;
    if (measured) {
      const auto it = census.find(j);
      count = it == census.end() ? 0.0 : static_cast<double>(it->second);
    } else {
      count = std::floor(std::exp2(plan.census_intercept + plan.census_slope * j));
    }
    const double need = 2.0 * std::exp2(lambda * (j - plan.k0));
    if (count < need) continue;
    PlanLevel lv;
    lv.j = j;
    lv.side = std::ldexp(1.0, -j);
    lv.m = std::exp2(std::floor(lambda * (j - plan.k0)));
    lv.census = count;
    lv.measured = measured;
    if (measured) {
      std::vector<std::size_t> ids = base.levels.at(j);
      std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        const Point pa = base.center(a), pb = base.center(b);
        return pa.x != pb.x ? pa.x < pb.x : pa.y < pb.y;
      });
      const auto take = static_cast<std::size_t>(2.0 * lv.m);
      ids.resize(take);
      lv.cubes = std::move(ids);
      lv.signs.assign(take, -1);
      std::fill(lv.signs.begin(), lv.signs.begin() + static_cast<std::ptrdiff_t>(take / 2), 1);
    }
    plan.levels.push_back(std::move(lv));
  }
  plan.complete = static_cast<int>(plan.levels.size()) >= m_max;
  return plan;
}

RatioSequence counterexample_sequence(const CounterexamplePlan& plan, double beta, double q, double p, int fit_lo,
                                      int fit_hi) {
  if (!(p > q)) throw PreconditionError("p must exceed q");
  RatioSequence s;
  double aq = 0.0, bp = 0.0;
  for (std::size_t k = 0; k < plan.levels.size(); ++k) {
    const PlanLevel& lv = plan.levels[k];
    TestFunctionSpec spec{{0.0, 0.0}, lv.side, beta, plan.lambda, q, 2};
    const TestFunctionNorms nm = test_function_norms(spec, p);
    aq += 2.0 * lv.m * nm.lq;
    bp += 2.0 * lv.m * nm.grad_p;
    s.rows.push_back({static_cast<int>(k + 1), std::pow(aq, 1.0 / q), std::pow(bp, 1.0 / p)});
  }
  s.fit_lo = fit_lo;
  s.fit_hi = std::min<int>(fit_hi, static_cast<int>(s.rows.size()));
  std::vector<double> x, y;
  for (const auto& r : s.rows)
    if (r.m >= s.fit_lo && r.m <= s.fit_hi) {
      x.push_back(std::log(static_cast<double>(r.m)));
      y.push_back(std::log(r.ratio()));
    }
  if (x.size() >= 2) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    s.slope = sxy / sxx;
  }
  return s;
}

double counterexample_signed_integral(const CounterexamplePlan& plan, const WhitneyDecomposition& base, double beta,
                                      double q, int m) {
  constexpr int kCells = 16;
  auto midpoint = [](const TestFunctionSpec& spec, const Box& b) {
    const double dx = b.width() / kCells, dy = b.height() / kCells;
    double s = 0.0;
    for (int i = 0; i < kCells; ++i)
      for (int k = 0; k < kCells; ++k) s += spec.eval({b.lo.x + (i + 0.5) * dx, b.lo.y + (k + 0.5) * dy});
    return s * dx * dy;
  };
  double total = 0.0;
  for (int k = 0; k < std::min<int>(m, static_cast<int>(plan.levels.size())); ++k) {
    const PlanLevel& lv = plan.levels[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < lv.cubes.size(); ++c) {
      TestFunctionSpec spec{base.center(lv.cubes[c]), base.side(lv.cubes[c]), beta, plan.lambda, q, 2};
      total += lv.signs[c] * (midpoint(spec, spec.room()) + midpoint(spec, spec.passage()));
    }
  }
  return total;
}

// ---------------------------------------------------------------------------

double GridFunction::mean() const {
  if (u.empty()) return 0.0;
  return std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
}

namespace {

// Bottleneck weight of an axis-parallel edge threading a channel between
// parallel walls closer than h/2 on either side.
double channel_weight(const Domain& d, Point a, Point b, double h, double p) {
  const bool horizontal = a.y == b.y;
  const double fixed = horizontal ? a.y : a.x;
  const double lo = horizontal ? std::min(a.x, b.x) : std::min(a.y, b.y);
  const double hi = horizontal ? std::max(a.x, b.x) : std::max(a.y, b.y);
  Box region = Box{{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  region = horizontal ? Box{{region.lo.x, fixed - h / 2}, {region.hi.x, fixed + h / 2}}
                      : Box{{fixed - h / 2, region.lo.y}, {fixed + h / 2, region.hi.y}};
  struct Side {
    double dist, lo, hi;
  };
  std::vector<Side> below, above;
  for (std::size_t id : d.walls_in(region)) {
    const Segment& s = d.walls()[id];
    const bool s_horizontal = s.a.y == s.b.y;
    if (s_horizontal != horizontal) continue;
    const double pos = horizontal ? s.a.y : s.a.x;
    const double slo = horizontal ? s.a.x : s.a.y;
    const double shi = horizontal ? s.b.x : s.b.y;
    const double olo = std::max(lo, slo), ohi = std::min(hi, shi);
    if (!(ohi > olo) || std::abs(pos - fixed) >= h / 2 || pos == fixed) continue;
    (pos < fixed ? below : above).push_back({std::abs(pos - fixed), olo, ohi});
  }
  double weight = 1.0;
  for (const Side& l : below)
    for (const Side& r : above) {
      const double len = std::min(l.hi, r.hi) - std::max(l.lo, r.lo);
      if (!(len > 0.0)) continue;
      const double g = l.dist + r.dist;
      weight = std::min(weight, g * std::pow(len, 1.0 - p) * std::pow(h, p - 2.0));
    }
  return weight;
}

double log_quotient(const GridFunction& g, const std::vector<double>& u, double q, double p, double& uq,
                    double& gp) {
  const double h2 = g.h * g.h;
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  uq = 0.0;
  for (double v : u) uq += h2 * std::pow(std::abs(v - mean), q);
  gp = 0.0;
  for (const auto& e : g.edges) gp += h2 * e.weight * std::pow(std::abs((u[e.b] - u[e.a]) / g.h), p);
  if (!(gp > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(uq) / q - std::log(gp) / p;
}

void log_quotient_gradient(const GridFunction& g, const std::vector<double>& u, double q, double p, double uq,
                           double gp, std::vector<double>& grad) {
  const std::size_t n = u.size();
  const double h2 = g.h * g.h;
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
  grad.assign(n, 0.0);
  double abar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = u[i] - mean;
    const double a = r == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(r), q - 1.0), r);
    grad[i] = a;
    abar += a;
  }
  abar /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) grad[i] = h2 * (grad[i] - abar) / uq;
  for (const auto& e : g.edges) {
    const double d = (u[e.b] - u[e.a]) / g.h;
    if (d == 0.0) continue;
    const double t = h2 * e.weight * std::copysign(std::pow(std::abs(d), p - 1.0), d) / g.h / gp;
    grad[e.b] -= t;
    grad[e.a] += t;
  }
}

struct AscentResult {
  double logq = -std::numeric_limits<double>::infinity();
  std::vector<double> u;
  std::vector<double> history;
};

AscentResult ascend(const GridFunction& g, std::vector<double> u, double q, double p, int iters) {
  AscentResult res;
  double uq = 0, gp = 0;
  double f = log_quotient(g, u, q, p, uq, gp);
  if (!std::isfinite(f)) return res;
  std::vector<double> grad, trial(u.size());
  double step = 0.1;
  for (int it = 0; it < iters && step > 1e-9; ++it) {
    log_quotient_gradient(g, u, q, p, uq, gp, grad);
    double gn = 0.0, spread = 0.0;
    const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      gn += grad[i] * grad[i];
      spread += (u[i] - mean) * (u[i] - mean);
    }
    if (!(gn > 0.0)) break;
    const double scale = step * std::sqrt(spread / gn);
    for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + scale * grad[i];
    double tuq = 0, tgp = 0;
    const double tf = log_quotient(g, trial, q, p, tuq, tgp);
    if (tf > f) {
      u.swap(trial);
      f = tf;
      uq = tuq;
      gp = tgp;
      step *= 1.2;
    } else {
      step *= 0.5;
    }
    res.history.push_back(std::exp(f));
  }
  res.logq = f;
  res.u = std::move(u);
  return res;
}

}  // namespace

GridFunction build_grid(const Domain& domain, double h, double p) {
  if (!(h > 0.0)) throw PreconditionError("h must be positive");
  const Box b = domain.bounds();
  const auto i0 = static_cast<std::int64_t>(std::ceil(b.lo.x / h)), i1 = static_cast<std::int64_t>(std::floor(b.hi.x / h));
  const auto k0 = static_cast<std::int64_t>(std::ceil(b.lo.y / h)), k1 = static_cast<std::int64_t>(std::floor(b.hi.y / h));
  const std::int64_t nx = i1 - i0 + 1, ny = k1 - k0 + 1;
  if (nx <= 0 || ny <= 0 || nx * ny > (std::int64_t{1} << 26)) throw PreconditionError("grid size out of range");
  std::vector<std::int64_t> id(static_cast<std::size_t>(nx * ny), -1);
  std::vector<Point> pts;
  for (std::int64_t k = 0; k < ny; ++k)
    for (std::int64_t i = 0; i < nx; ++i) {
      const Point x{static_cast<double>(i0 + i) * h, static_cast<double>(k0 + k) * h};
      if (domain.contains(x)) {
        id[static_cast<std::size_t>(k * nx + i)] = static_cast<std::int64_t>(pts.size());
        pts.push_back(x);
      }
    }
  if (pts.empty()) throw PreconditionError("grid mask is empty");
  std::vector<GridEdge> edges;
  auto link = [&](std::int64_t a, std::int64_t c) {
    if (a < 0 || c < 0) return;
    const Point pa = pts[static_cast<std::size_t>(a)], pc = pts[static_cast<std::size_t>(c)];
    if (domain.segment_blocked(make_segment(pa, pc))) return;
    const double wgt = channel_weight(domain, pa, pc, h, p);
    if (wgt > 0.0) edges.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(c), wgt});
  };
  for (std::int64_t k = 0; k < ny; ++k)
    for (std::int64_t i = 0; i < nx; ++i) {
      const std::int64_t a = id[static_cast<std::size_t>(k * nx + i)];
      if (a < 0) continue;
      if (i + 1 < nx) link(a, id[static_cast<std::size_t>(k * nx + i + 1)]);
      if (k + 1 < ny) link(a, id[static_cast<std::size_t>((k + 1) * nx + i)]);
    }

  // Largest component; the smallest node id wins ties.
  std::vector<std::uint32_t> parent(pts.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    const auto ra = find(e.a), rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::size_t> size(pts.size(), 0);
  for (std::uint32_t i = 0; i < pts.size(); ++i) ++size[find(i)];
  std::uint32_t best = 0;
  for (std::uint32_t i = 0; i < pts.size(); ++i)
    if (size[i] > size[best]) best = i;

  GridFunction g;
  g.h = h;
  std::vector<std::int64_t> remap(pts.size(), -1);
  for (std::uint32_t i = 0; i < pts.size(); ++i)
    if (find(i) == best) {
      remap[i] = static_cast<std::int64_t>(g.nodes.size());
      g.nodes.push_back(pts[i]);
    }
  for (const auto& e : edges)
    if (remap[e.a] >= 0 && remap[e.b] >= 0)
      g.edges.push_back({static_cast<std::uint32_t>(remap[e.a]), static_cast<std::uint32_t>(remap[e.b]), e.weight});
  g.u.assign(g.nodes.size(), 0.0);
  return g;
}

double grid_quotient(const GridFunction& g, double q, double p) {
  if (g.u.size() != g.nodes.size() || g.nodes.empty()) throw PreconditionError("grid function is empty");
  double uq = 0, gp = 0;
  const double f = log_quotient(g, g.u, q, p, uq, gp);
  if (!std::isfinite(f)) throw PreconditionError("gradient is identically zero");
  return std::exp(f);
}

PoincareEstimate discrete_poincare_lower_bound(const Domain& domain, const WhitneyDecomposition& w, double q,
                                               double p, double h, const EstimatorOptions& opts) {
  if (!(q >= 1.0) || !(p >= 1.0)) throw PreconditionError("q and p must be at least 1");
  GridFunction grid = build_grid(domain, h, p);
  const std::size_t n = grid.nodes.size();
  if (n < 2) throw PreconditionError("grid mask has fewer than two nodes");

  struct Start {
    std::string name;
    std::vector<double> u;
  };
  std::vector<Start> starts;
  if (w.size() > 0) {
    TestFunctionSpec spec{w.center(0), w.side(0), opts.beta, std::max(1.0, std::min(opts.lambda, 1.999)), q, 2};
    Start s{"test-function", std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) s.u[i] = spec.eval(grid.nodes[i]);
    starts.push_back(std::move(s));
  }
  {
    Start sx{"coordinate-x", std::vector<double>(n)}, sy{"coordinate-y", std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      sx.u[i] = grid.nodes[i].x;
      sy.u[i] = grid.nodes[i].y;
    }
    starts.push_back(std::move(sx));
    starts.push_back(std::move(sy));
  }
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng(opts.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r + 1));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Start s{"noise-" + std::to_string(r), std::vector<double>(n)};
    for (double& v : s.u) v = unif(rng);
    starts.push_back(std::move(s));
  }

  PoincareEstimate best;
  double best_log = -std::numeric_limits<double>::infinity();
  for (auto& s : starts) {
    AscentResult r = ascend(grid, std::move(s.u), q, p, opts.iters);
    if (r.logq > best_log) {
      best_log = r.logq;
      best.start = s.name;
      best.history = std::move(r.history);
      grid.u = std::move(r.u);
      best.best = grid;
    }
  }
  if (!std::isfinite(best_log)) throw PreconditionError("gradient is identically zero for every start");
  best.quotient = grid_quotient(best.best, q, p);
  return best;
}

// ---------------------------------------------------------------------------

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Supported: return "Supported";
    case Verdict::CounterexampleRegime: return "CounterexampleRegime";
    case Verdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

PredicateResult supports_poincare_predicate(const PoincareParams& pp, std::optional<double> c2bar) {
  validate_common(pp.q, pp.lambda, pp.beta, pp.n);
  if (!(pp.p >= pp.q) || !std::isfinite(pp.p)) throw PreconditionError("p must satisfy q <= p < infinity");
  if (c2bar && !(*c2bar > 0.0)) throw PreconditionError("assumed_c2bar must be positive");
  PredicateResult r;
  r.p0 = threshold_p0(pp.q, pp.lambda, pp.beta, pp.n);
  const double crit = pp.n - pp.n * pp.beta;
  if (pp.p == pp.q) {
    r.rule = std::abs(pp.q - crit) <= 1e-12 ? "boundary case q = p = n - n beta is open"
                                             : "q = p lies outside the sufficient condition";
    return r;
  }
  if (pp.p > r.p0) {
    r.verdict = Verdict::Supported;
    r.rule = "p > p0: sufficient condition holds";
    return r;
  }
  if (pp.n == 2 && c2bar && pp.beta < 1.0 && pp.lambda <= 2.0 - *c2bar * pp.beta) {
    r.verdict = Verdict::CounterexampleRegime;
    r.conditional = true;
    r.rule = "n = 2, p <= p0 and lambda <= 2 - c2bar beta: a failing domain exists";
    return r;
  }
  r.rule = "p <= p0 without a planar counterexample hypothesis";
  return r;
}

Solvable neumann_q_solvable(int n, double beta, double q) {
  if (n < 2) throw PreconditionError("n must be at least 2");
  if (!(beta > 0.0 && beta <= 1.0)) throw PreconditionError("beta must lie in (0,1]");
  if (!(q >= 1.0)) throw PreconditionError("q must be at least 1");
  return beta >= 1.0 - 2.0 / n && q < 2.0 ? Solvable::True : Solvable::Unknown;
}

void write_ratio_csv(std::ostream& out, const RatioSequence& s) {
  out << "m,A_m,B_m,ratio\n";
  for (const auto& r : s.rows) out << r.m << ',' << num(r.a) << ',' << num(r.b) << ',' << num(r.ratio()) << '\n';
}

void write_threshold_csv(std::ostream& out, int n, double q, double beta, const std::vector<double>& lambdas) {
  out << "n,q,lambda,beta,p0\n";
  for (double l : lambdas)
    out << n << ',' << num(q) << ',' << num(l) << ',' << num(beta) << ',' << num(threshold_p0(q, l, beta, n)) << '\n';
}

}  // namespace qhlab
