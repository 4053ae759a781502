// Threshold algebra, the room-and-passage counterexample, a discrete
// lower-bound estimator for the best Poincare constant, and the decision
// predicates.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qhlab/domains.hpp"
#include "qhlab/whitney.hpp"

namespace qhlab {

struct PoincareParams {
  int n = 2;
  double q = 1.0;
  double p = 2.0;
  double lambda = 1.0;
  double beta = 1.0;
};

/// q (n - lambda beta) / (q + beta (n - lambda)).
double threshold_p0(double q, double lambda, double beta, int n);

struct MonotonicityCheck {
  bool pass = true;
  std::vector<double> values;
  double min_increment = 0.0;
};

/// p0 strictly increasing along a sorted lambda grid. Requires q < n - n beta.
MonotonicityCheck p0_monotonicity_check(double q, double beta, int n, std::vector<double> lambdas);

// Test functions ------------------------------------------------------------

/// u on R(Q) u closure(P(Q)) of a cube with centre `center` and side `side`.
struct TestFunctionSpec {
  Point center;
  double side = 1.0;
  double beta = 1.0;
  double lambda = 1.0;
  double q = 1.0;
  int n = 2;

  void validate() const;
  double value() const;           // side^{(lambda - n)/q}
  double gradient() const;        // 8^{1/beta} side^{(lambda - n)/q - 1/beta}
  double passage_width() const;   // (side/8)^{1/beta}
  Box room() const;
  Box passage() const;
  /// value on the closed room, linear in y across the closed passage, else 0.
  double eval(Point x) const;
};

struct TestFunctionNorms {
  double room = 0.0;      // 4^-n side^lambda
  double passage = 0.0;   // value^q vol(P) / (q + 1)
  double lq = 0.0;        // room + passage
  double grad_p = 0.0;    // gradient^p 2^{n-1} (side/8)^{n/beta}
};

TestFunctionNorms test_function_norms(const TestFunctionSpec& spec, double p);

// Counterexample ------------------------------------------------------------

struct PlanLevel {
  int j = 0;
  double side = 0.0;
  double m = 0.0;                    // M_j = 2^{[lambda (j - k0)]}
  double census = 0.0;               // #W_j, measured or extrapolated
  bool measured = true;
  std::vector<std::size_t> cubes;    // 2M selected ids (measured levels only)
  std::vector<int> signs;
};

struct CounterexamplePlan {
  int k0 = 0;
  double lambda = 1.0;
  std::vector<PlanLevel> levels;
  double census_slope = 0.0;      // fitted log2 #W_j per level
  double census_intercept = 0.0;
  bool complete = true;           // false when fewer than m_max levels qualify
};

/// k0 is the first level with #W >= 2; j(k) are the successive levels with
/// #W_j >= 2 * 2^{lambda (j - k0)}. With `extrapolate`, levels past the
/// decomposition take #W_j from a power law fitted to the finest half of
/// the census.
CounterexamplePlan build_counterexample_plan(const WhitneyDecomposition& base, double lambda, int m_max,
                                             bool extrapolate = true);

struct RatioRow {
  int m = 0;
  double a = 0.0;
  double b = 0.0;
  double ratio() const { return a / b; }
};

struct RatioSequence {
  std::vector<RatioRow> rows;
  double slope = 0.0;  // of log(A_m/B_m) on log m over the fit window
  int fit_lo = 0;
  int fit_hi = 0;
};

RatioSequence counterexample_sequence(const CounterexamplePlan& plan, double beta, double q, double p,
                                      int fit_lo = 4, int fit_hi = 64);

/// Signed sum of the room and passage integrals of v_m over the measured levels.
double counterexample_signed_integral(const CounterexamplePlan& plan, const WhitneyDecomposition& base,
                                      double beta, double q, int m);

// Discrete estimator --------------------------------------------------------

struct GridEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 1.0;
};

/// Node grid at integer multiples of h restricted to the largest connected
/// component of member nodes; edges join 4-neighbours whose segment is not
/// blocked. An edge threading a channel narrower than h between parallel
/// walls gets the weight g L^{1-p} h^{p-2} of the channel (width g, length L).
struct GridFunction {
  double h = 0.0;
  std::vector<Point> nodes;
  std::vector<GridEdge> edges;
  std::vector<double> u;

  double mean() const;
};

GridFunction build_grid(const Domain& domain, double h, double p);

/// ||u - u_G||_q / ||grad u||_p on the grid. Throws on a zero gradient.
double grid_quotient(const GridFunction& g, double q, double p);

struct EstimatorOptions {
  int iters = 200;
  int restarts = 3;
  std::uint64_t seed = 1;
  double beta = 1.0;
  double lambda = 1.0;
};

struct PoincareEstimate {
  double quotient = 0.0;
  GridFunction best;
  std::string start;
  std::vector<double> history;  // best quotient after each iteration of the winning start
};

/// Normalized gradient ascent of log ||u - u_G||_q - log ||grad u||_p from the
/// test function of the largest Whitney cube, the coordinate functions and
/// seeded noise; returns the best quotient seen.
PoincareEstimate discrete_poincare_lower_bound(const Domain& domain, const WhitneyDecomposition& w, double q,
                                               double p, double h, const EstimatorOptions& opts = {});

// Predicates ----------------------------------------------------------------

enum class Verdict { Supported, CounterexampleRegime, Unknown };
const char* verdict_name(Verdict v);

struct PredicateResult {
  Verdict verdict = Verdict::Unknown;
  double p0 = 0.0;
  std::string rule;
  bool conditional = false;  // depends on assumed_c2bar
};

PredicateResult supports_poincare_predicate(const PoincareParams& params,
                                            std::optional<double> assumed_c2bar = std::nullopt);

enum class Solvable { True, Unknown };
Solvable neumann_q_solvable(int n, double beta, double q);

// CSV -----------------------------------------------------------------------

void write_ratio_csv(std::ostream& out, const RatioSequence& s);
void write_threshold_csv(std::ostream& out, int n, double q, double beta, const std::vector<double>& lambdas);

}  // namespace qhlab
