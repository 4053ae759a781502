#include "qhlab/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "qhlab/dimension.hpp"
#include "qhlab/poincare.hpp"
#include "qhlab/qhchains.hpp"

#ifndef QHLAB_VERSION
#define QHLAB_VERSION "0.0.0"
#endif

namespace qhlab {
namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw PreconditionError(key + " expects a number, got '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw PreconditionError(key + " expects an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw PreconditionError(key + " expects true or false, got '" + v + "'");
}

const char* flag_str(bool b) { return b ? "true" : "false"; }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw PreconditionError("cannot write " + p.string());
  return f;
}

template <class F>
void write_text(const std::filesystem::path& p, const std::string& header, F&& body) {
  auto f = open_out(p);
  f << header << '\n';
  body(f);
  if (!f) throw PreconditionError("write failed: " + p.string());
}

void write_json(const std::filesystem::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class F>
auto stage(const char* name, std::ostream* log, F&& f) -> decltype(f()) {
  const auto t0 = std::chrono::steady_clock::now();
  auto report = [&] {
    if (!log) return;
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *log << "stage " << name << ' ' << short_num(s) << " s\n";
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      report();
    } else {
      auto r = f();
      report();
      return r;
    }
  } catch (const PreconditionError& e) {
    throw PreconditionError(std::string(name) + ": " + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw InvariantError(std::string(name) + ": " + e.what());
  }
}

// Level colours cycle through the hue circle.
std::string level_colour(int j) {
  const int hue = ((j * 47) % 360 + 360) % 360;
  return "hsl(" + std::to_string(hue) + ",65%,72%)";
}

}  // namespace

const char* version() { return QHLAB_VERSION; }

// Config ----------------------------------------------------------------------

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "domain", "domain_file", "lambda", "depth", "beta", "base_jmax", "jmax",   "q",        "p",
      "eps",    "c2bar",       "h",      "iters", "restarts", "m_max", "radii_levels", "flag", "seed",
      "chains", "dimension",   "poincare", "estimate", "out"};
  return keys;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "domain") c.domain = v;
  else if (key == "domain_file") c.domain_file = v;
  else if (key == "lambda") c.lambda = parse_double(key, v);
  else if (key == "depth") c.depth = static_cast<int>(parse_int(key, v));
  else if (key == "beta") c.beta = parse_double(key, v);
  else if (key == "base_jmax") c.base_jmax = static_cast<int>(parse_int(key, v));
  else if (key == "jmax") c.jmax = static_cast<int>(parse_int(key, v));
  else if (key == "q") c.q = parse_double(key, v);
  else if (key == "p") c.p = parse_double(key, v);
  else if (key == "eps") c.eps = parse_double(key, v);
  else if (key == "c2bar") c.c2bar = v.empty() || v == "none" ? std::nullopt : std::optional(parse_double(key, v));
  else if (key == "h") c.h = parse_double(key, v);
  else if (key == "iters") c.iters = static_cast<int>(parse_int(key, v));
  else if (key == "restarts") c.restarts = static_cast<int>(parse_int(key, v));
  else if (key == "m_max") c.m_max = static_cast<int>(parse_int(key, v));
  else if (key == "radii_levels") c.radii_levels = static_cast<int>(parse_int(key, v));
  else if (key == "flag") c.flag = static_cast<std::ptrdiff_t>(parse_int(key, v));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "chains") c.chains = parse_bool(key, v);
  else if (key == "dimension") c.dimension = parse_bool(key, v);
  else if (key == "poincare") c.poincare = parse_bool(key, v);
  else if (key == "estimate") c.estimate = parse_bool(key, v);
  else if (key == "out") c.out = v;
  else throw PreconditionError("unknown config key '" + key + "'");
}

std::string get_config_value(const RunConfig& c, const std::string& key) {
  if (key == "domain") return c.domain;
  if (key == "domain_file") return c.domain_file;
  if (key == "lambda") return num(c.lambda);
  if (key == "depth") return std::to_string(c.depth);
  if (key == "beta") return num(c.beta);
  if (key == "base_jmax") return std::to_string(c.base_jmax);
  if (key == "jmax") return std::to_string(c.jmax);
  if (key == "q") return num(c.q);
  if (key == "p") return num(c.p);
  if (key == "eps") return num(c.eps);
  if (key == "c2bar") return c.c2bar ? num(*c.c2bar) : "none";
  if (key == "h") return num(c.h);
  if (key == "iters") return std::to_string(c.iters);
  if (key == "restarts") return std::to_string(c.restarts);
  if (key == "m_max") return std::to_string(c.m_max);
  if (key == "radii_levels") return std::to_string(c.radii_levels);
  if (key == "flag") return std::to_string(c.flag);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "chains") return flag_str(c.chains);
  if (key == "dimension") return flag_str(c.dimension);
  if (key == "poincare") return flag_str(c.poincare);
  if (key == "estimate") return flag_str(c.estimate);
  if (key == "out") return c.out;
  throw PreconditionError("unknown config key '" + key + "'");
}

void read_config(std::istream& in, RunConfig& c) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw PreconditionError("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void validate_config(const RunConfig& c) {
  if (c.domain != "square" && c.domain != "l-shape" && c.domain != "four-corner" && c.domain != "file")
    throw PreconditionError("domain must be one of square, l-shape, four-corner, file");
  if (c.domain == "file" && c.domain_file.empty()) throw PreconditionError("domain file requires domain_file");
  if (!(c.lambda >= 1.0 && c.lambda < 2.0)) throw PreconditionError("lambda must lie in [1,2)");
  if (c.depth < 0 || c.depth > 11) throw PreconditionError("depth must lie in [0,11]");
  if (!(c.beta > 0.0 && c.beta <= 1.0)) throw PreconditionError("beta must lie in (0,1]");
  if (c.base_jmax < 1 || c.base_jmax > 12) throw PreconditionError("base_jmax must lie in [1,12]");
  if (c.jmax < 1 || c.jmax > 40) throw PreconditionError("jmax must lie in [1,40]");
  if (!(c.q >= 1.0)) throw PreconditionError("q must be at least 1");
  if (!(c.p >= c.q)) throw PreconditionError("p must be at least q");
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw PreconditionError("eps must lie in (0,1)");
  if (c.c2bar && !(*c.c2bar > 0.0)) throw PreconditionError("c2bar must be positive");
  if (!(c.h > 0.0 && c.h <= 1.0)) throw PreconditionError("h must lie in (0,1]");
  if (c.iters < 1) throw PreconditionError("iters must be at least 1");
  if (c.restarts < 0) throw PreconditionError("restarts must be nonnegative");
  if (c.m_max < 5) throw PreconditionError("m_max must be at least 5");
  if (c.radii_levels < 4 || c.radii_levels > 24) throw PreconditionError("radii_levels must lie in [4,24]");
}

std::string canonical_config(const RunConfig& c) {
  std::string s;
  for (const auto& k : config_keys())
    if (k != "out") s += k + "=" + get_config_value(c, k) + "\n";
  return s;
}

std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string header_comment(const RunConfig& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "# qhlab %s config=%016llx seed=%llu", version(),
                static_cast<unsigned long long>(config_hash(c)), static_cast<unsigned long long>(c.seed));
  return buf;
}

// Fixtures --------------------------------------------------------------------

Fixture build_fixture(const RunConfig& c) {
  validate_config(c);
  Fixture f;
  if (c.domain == "square") {
    f.base = unit_square();
  } else if (c.domain == "l-shape") {
    f.base = l_shape();
  } else if (c.domain == "four-corner") {
    f.base = build_disk_minus_fractal(c.lambda, c.depth);
  } else {
    std::ifstream in(c.domain_file);
    if (!in) throw PreconditionError("cannot read domain file " + c.domain_file);
    f.base = read_domain(in);
  }
  if (c.beta < 1.0) {
    f.base_whitney = whitney_decompose(f.base, c.base_jmax);
    f.beta_version = build_beta_version(f.base, *f.base_whitney, c.beta);
  }
  return f;
}

void write_provenance_json(std::ostream& out, const Domain& d, const RunConfig& c) {
  json j;
  j["_comment"] = header_comment(c);
  j["builder"] = d.provenance().builder;
  json params = json::object();
  for (const auto& [k, v] : d.provenance().params) params[k] = v;
  j["params"] = params;
  j["outer"] = d.outer() == Domain::Outer::Disc ? "disc" : "box-union";
  j["scale"] = d.scale();
  j["certified_error"] = d.certified_error();
  j["distinguished_point"] = {d.distinguished_point().x, d.distinguished_point().y};
  j["holes"] = d.holes().size();
  j["walls"] = d.walls().size();
  j["config"] = canonical_config(c);
  out << j.dump(2) << '\n';
}

// SVG -------------------------------------------------------------------------

void write_svg(std::ostream& out, const Domain& d, const WhitneyDecomposition* w, const SvgOptions& o) {
  const Box b = d.bounds();
  const double ext = std::max(b.width(), b.height());
  const double margin = 0.02 * ext;
  const double s = o.width / (ext + 2.0 * margin);
  const double height = (b.height() + 2.0 * margin) * s;
  const double width = (b.width() + 2.0 * margin) * s;
  auto X = [&](double x) { return short_num((x - b.lo.x + margin) * s); };
  auto Y = [&](double y) { return short_num((b.hi.y - y + margin) * s); };
  auto rect = [&](const Box& r, const std::string& style) {
    out << "<rect x=\"" << X(r.lo.x) << "\" y=\"" << Y(r.hi.y) << "\" width=\"" << short_num(r.width() * s)
        << "\" height=\"" << short_num(r.height() * s) << "\" " << style << "/>\n";
  };
  auto line = [&](Point a, Point c, const std::string& style) {
    out << "<line x1=\"" << X(a.x) << "\" y1=\"" << Y(a.y) << "\" x2=\"" << X(c.x) << "\" y2=\"" << Y(c.y) << "\" "
        << style << "/>\n";
  };

  if (!o.comment.empty()) out << "<!-- " << o.comment.substr(o.comment.rfind("# ") == 0 ? 2 : 0) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << short_num(width) << "\" height=\""
      << short_num(height) << "\" viewBox=\"0 0 " << short_num(width) << ' ' << short_num(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (d.disc()) {
    const Circle& c = *d.disc();
    out << "<circle cx=\"" << X(c.center.x) << "\" cy=\"" << Y(c.center.y) << "\" r=\"" << short_num(c.radius * s)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  if (w) {
    out << "<g stroke=\"#555\" stroke-width=\"0.1\">\n";
    for (std::size_t i = 0; i < w->size(); ++i)
      rect(w->box(i), "fill=\"" + level_colour(w->scale_level(i)) + "\"");
    out << "</g>\n";
    if (!o.highlight.empty()) {
      out << "<g fill=\"#d62728\" fill-opacity=\"0.55\" stroke=\"#d62728\" stroke-width=\"0.2\">\n";
      for (std::size_t i : o.highlight) rect(w->box(i), "");
      out << "</g>\n";
    }
    if (o.flagged >= 0 && static_cast<std::size_t>(o.flagged) < w->size())
      rect(w->box(static_cast<std::size_t>(o.flagged)), "fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"");
  }
  out << "<g fill=\"#333\" stroke=\"none\">\n";
  for (const Box& h : d.holes()) rect(h, "");
  out << "</g>\n<g stroke=\"black\" stroke-width=\"0.6\">\n";
  for (const Segment& sg : d.outer_segments()) line(sg.a, sg.b, "");
  out << "</g>\n<g stroke=\"#1f3b99\" stroke-width=\"0.5\">\n";
  for (const Segment& sg : d.walls()) line(sg.a, sg.b, "");
  out << "</g>\n";
  out << "<text x=\"4\" y=\"14\" font-family=\"monospace\" font-size=\"11\">" << d.provenance().builder;
  if (w) out << " cubes=" << w->size() << " jmax=" << w->max_level;
  out << "</text>\n</svg>\n";
}

// Pipeline --------------------------------------------------------------------

unsigned pipeline_stages(const RunConfig& c) {
  unsigned s = kStageBuild | kStageWhitney | kStageRender | kStageSummary;
  if (c.chains) s |= kStageQhFit | kStageShadows;
  if (c.dimension) s |= kStageDimension;
  if (c.poincare) s |= kStageThreshold | kStagePredicate | kStageCounterexample;
  if (c.poincare && c.estimate) s |= kStageEstimate;
  return s;
}

std::string run_pipeline(const RunConfig& c, const std::filesystem::path& dir, std::ostream* log) {
  return run_stages(c, dir, pipeline_stages(c), log);
}

std::string run_stages(const RunConfig& c, const std::filesystem::path& dir, unsigned stages, std::ostream* log) {
  auto want = [&](unsigned s) { return (stages & s) != 0; };
  stage("config", log, [&] { validate_config(c); });
  std::filesystem::create_directories(dir);
  const std::string head = header_comment(c);

  json summary;
  summary["_comment"] = head;
  summary["version"] = version();
  summary["seed"] = c.seed;
  summary["config"] = json::object();
  for (const auto& k : config_keys())
    if (k != "out") summary["config"][k] = get_config_value(c, k);
  for (const char* k : {"beta_fit", "c_fit", "dimension", "p0", "predicate", "sigma", "ratio_slope", "lower_bound"})
    summary[k] = nullptr;

  const bool need_domain = want(~(kStageThreshold | kStagePredicate | kStageSummary));
  const bool need_tree = want(kStageQhFit | kStageShadows | kStageRender);
  const bool need_w = need_tree || want(kStageWhitney | kStageDimension | kStageCounterexample | kStageEstimate);

  std::optional<Fixture> fx;
  if (need_domain) {
    fx = stage("build", log, [&] { return build_fixture(c); });
    summary["domain"] = {{"builder", fx->domain().provenance().builder},
                         {"holes", fx->domain().holes().size()},
                         {"walls", fx->domain().walls().size()}};
  }
  if (want(kStageBuild)) {
    stage("build", log, [&] {
      write_text(dir / "domain.txt", head, [&](std::ostream& o) { write_domain(o, fx->domain()); });
      auto f = open_out(dir / "provenance.json");
      write_provenance_json(f, fx->domain(), c);
    });
  }

  std::optional<WhitneyDecomposition> w;
  if (need_w) {
    w = stage("whitney", log, [&] {
      WhitneyDecomposition d = whitney_decompose(fx->domain(), c.jmax);
      const WhitneyCheck chk = check_whitney(d, fx->domain(), 10000, c.seed);
      if (!chk.two_sided_bound || !chk.disjoint || !chk.inside)
        throw InvariantError("Whitney decomposition fails its invariants");
      summary["whitney"] = {{"cubes", d.size()},
                            {"truncated", d.truncated.size()},
                            {"jmax", d.max_level},
                            {"max_overlap", chk.max_overlap}};
      if (want(kStageWhitney)) {
        write_text(dir / "whitney.txt", head, [&](std::ostream& o) { write_whitney(o, d); });
        write_text(dir / "census.csv", head, [&](std::ostream& o) { write_census_csv(o, d); });
      }
      return d;
    });
  }

  std::ptrdiff_t flagged = c.flag;
  std::optional<ChainTree> tree;
  if (need_tree) {
    stage("chains", log, [&] {
      const Domain& domain = fx->domain();
      CubeGraph g = build_cube_graph(*w);
      qh_edge_weights(g, *w, domain);
      const std::size_t q0 = base_cube(*w, domain.distinguished_point());
      tree = chain_tree(g, *w, q0);
      if (!check_chain_condition(*tree, *w)) throw InvariantError("chain condition violated");
      if (!want(kStageQhFit | kStageShadows)) return;
      const QhbcFit fit = qhbc_fit(*tree, g);
      const ShadowSumRatio ratio = shadow_sum_ratio(*tree, *w, c.q, c.eps);
      if (flagged < 0) flagged = static_cast<std::ptrdiff_t>(ratio.argmax);
      summary["beta_fit"] = fit.beta;
      summary["c_fit"] = fit.c;
      if (want(kStageQhFit)) {
        const double john = john_constant_estimate(*tree, *w, g, domain);
        summary["qh_fit"] = {{"root", q0},
                             {"reachable", tree->reachable()},
                             {"slope", fit.slope},
                             {"used", fit.used},
                             {"john_lower_bound", john}};
        write_text(dir / "chains.csv", head, [&](std::ostream& o) { write_chains_csv(o, *tree, *w, g); });
        write_text(dir / "qhbc_fit.csv", head, [&](std::ostream& o) { write_qhbc_csv(o, fit); });
      }
      if (want(kStageShadows)) {
        const ShadowStats st = classify_levels(*tree, *w, fit.beta, c.lambda);
        const ChainConstants cc = chain_constants(*tree, *w, std::min(fit.beta, 1.0));
        summary["shadows"] = {{"classification_coverage", st.coverage()},
                              {"counting_ratio", st.counting_ratio},
                              {"shadow_sum_ratio", ratio.max_ratio},
                              {"eks", cc.eks},
                              {"comparability", cc.comparability()},
                              {"shadow_diam", cc.shadow_diam}};
        write_text(dir / "shadows.csv", head, [&](std::ostream& o) { write_shadows_csv(o, st, *tree); });
        summary["sigma"] = nullptr;
        if (c.p > c.q) {
          const std::vector<int> group =
              fx->base_whitney ? apartment_groups(*w, *fx->base_whitney) : std::vector<int>{};
          const SigmaSeries sg = sigma_chain_sum(*tree, *w, c.q, c.p, group);
          summary["sigma"] = {{"total", finite_or_null(sg.total)},
                              {"decay_ratio", finite_or_null(sg.decay_ratio)},
                              {"decays", sg.decays()}};
          write_text(dir / "sigma_series.csv", head, [&](std::ostream& o) { write_sigma_csv(o, sg); });
        }
      }
    });
  }

  if (want(kStageDimension)) {
    stage("dimension", log, [&] {
      const Primitives set = c.domain == "four-corner" ? ifs_primitives(make_four_corner_ifs(c.lambda), c.depth)
                                                       : boundary_primitives(fx->domain());
      const Box bb = set.bounds();
      std::vector<double> radii;
      for (double r : dyadic_radii(c.radii_levels))
        if (r <= std::max(bb.width(), bb.height())) radii.push_back(r);
      const BoxCountSeries series = box_count_series(set, radii, c.lambda);
      const DimensionEstimate bc = minkowski_fit(series);
      const DimensionEstimate wc = whitney_dim_estimate(level_counts(*w), w->max_level - 2);
      write_text(dir / "boxcount.csv", head, [&](std::ostream& o) { write_boxcount_csv(o, series); });
      write_text(dir / "dimension.csv", head, [&](std::ostream& o) {
        o << "method,slope,intercept,residual,scale_min,scale_max,used\n";
        auto row = [&](const char* name, const DimensionEstimate& e) {
          o << name << ',' << num(e.slope) << ',' << num(e.intercept) << ',' << num(e.residual) << ','
            << num(e.scale_min) << ',' << num(e.scale_max) << ',' << e.used << '\n';
        };
        row("boxcount", bc);
        row("whitney_census", wc);
      });
      summary["dimension"] = {{"set", series.descriptor}, {"boxcount", bc.slope}, {"whitney_census", wc.slope}};
    });
  }

  if (want(kStageThreshold | kStagePredicate | kStageCounterexample)) {
    stage("poincare", log, [&] {
      summary["p0"] = threshold_p0(c.q, c.lambda, c.beta, 2);
      if (want(kStageThreshold)) {
        std::vector<double> lambdas;
        for (int k = 0; k < 10; ++k) lambdas.push_back(1.0 + 0.1 * k);
        write_text(dir / "threshold_table.csv", head,
                   [&](std::ostream& o) { write_threshold_csv(o, 2, c.q, c.beta, lambdas); });
      }
      if (want(kStagePredicate)) {
        const PredicateResult pr = supports_poincare_predicate({2, c.q, c.p, c.lambda, c.beta}, c.c2bar);
        const bool neumann = neumann_q_solvable(2, c.beta, c.q) == Solvable::True;
        json pj;
        pj["_comment"] = head;
        pj["verdict"] = verdict_name(pr.verdict);
        pj["p0"] = pr.p0;
        pj["rule"] = pr.rule;
        pj["conditional"] = pr.conditional;
        pj["assumed_c2bar"] = c.c2bar ? json(*c.c2bar) : json(nullptr);
        pj["params"] = {{"n", 2}, {"q", c.q}, {"p", c.p}, {"lambda", c.lambda}, {"beta", c.beta}};
        pj["neumann_q_solvable"] = neumann ? "True" : "Unknown";
        write_json(dir / "predicate.json", pj);
        summary["predicate"] = {{"verdict", pj["verdict"]},
                                {"rule", pr.rule},
                                {"conditional", pr.conditional},
                                {"neumann_q_solvable", pj["neumann_q_solvable"]}};
      }
      if (want(kStageCounterexample)) {
        summary["ratio_slope"] = nullptr;
        if (c.p > c.q) {
          const WhitneyDecomposition plan_w =
              fx->base_whitney ? whitney_decompose(fx->base, c.jmax) : WhitneyDecomposition(*w);
          const CounterexamplePlan plan = build_counterexample_plan(plan_w, c.lambda, c.m_max);
          const RatioSequence seq = counterexample_sequence(plan, c.beta, c.q, c.p, 4, c.m_max);
          summary["ratio_slope"] = seq.slope;
          summary["counterexample"] = {
              {"k0", plan.k0},
              {"levels", plan.levels.size()},
              {"complete", plan.complete},
              {"signed_integral", counterexample_signed_integral(plan, plan_w, c.beta, c.q, c.m_max)}};
          write_text(dir / "ratio_sequence.csv", head, [&](std::ostream& o) { write_ratio_csv(o, seq); });
        }
      }
    });
  }

  if (want(kStageEstimate)) {
    stage("estimate", log, [&] {
      EstimatorOptions opts;
      opts.iters = c.iters;
      opts.restarts = c.restarts;
      opts.seed = c.seed;
      opts.beta = c.beta;
      opts.lambda = c.lambda;
      const WhitneyDecomposition& test_w = fx->base_whitney ? *fx->base_whitney : *w;
      const PoincareEstimate e = discrete_poincare_lower_bound(fx->domain(), test_w, c.q, c.p, c.h, opts);
      summary["lower_bound"] = {{"quotient", e.quotient},
                                {"h", c.h},
                                {"start", e.start},
                                {"nodes", e.best.nodes.size()}};
      write_text(dir / "estimate.csv", head, [&](std::ostream& o) {
        o << "iter,quotient\n";
        for (std::size_t i = 0; i < e.history.size(); ++i) o << i << ',' << num(e.history[i]) << '\n';
      });
    });
  }

  if (want(kStageRender)) {
    stage("render", log, [&] {
      SvgOptions so;
      so.comment = head;
      if (flagged < 0 && tree) {
        const ShadowSumRatio ratio = shadow_sum_ratio(*tree, *w, c.q, c.eps);
        flagged = static_cast<std::ptrdiff_t>(ratio.argmax);
      }
      if (flagged >= 0) {
        if (static_cast<std::size_t>(flagged) >= w->size()) throw PreconditionError("flag is not a cube id");
        so.flagged = flagged;
        if (tree && tree->contains(static_cast<std::size_t>(flagged)))
          so.highlight = shadow_cubes(*tree, static_cast<std::size_t>(flagged));
      }
      summary["flagged_cube"] = flagged >= 0 ? json(flagged) : json(nullptr);
      auto f = open_out(dir / "domain.svg");
      write_svg(f, fx->domain(), &*w, so);
    });
  }

  const std::string text = summary.dump(2);
  if (want(kStageSummary)) {
    stage("summary", log, [&] {
      auto f = open_out(dir / "summary.json");
      f << text << '\n';
    });
  }
  return text;
}

}  // namespace qhlab
