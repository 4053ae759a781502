// Quasihyperbolic distances on the cube graph, chain trees, shadows and the
// level statistics built from them.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <vector>

#include "qhlab/domains.hpp"
#include "qhlab/whitney.hpp"

namespace qhlab {

/// Fills g.node_dist with dist(x_Q, boundary) and g.weights with
/// |x_Q - x_R| / ((dist(x_Q) + dist(x_R)) / 2).
void qh_edge_weights(CubeGraph& g, const WhitneyDecomposition& w, const Domain& domain);

/// Graph estimate of k_G(x, y): Dijkstra between host cubes plus
/// |x - x_Q| / dist(x) at both ends. Exactly symmetric.
double qh_distance(const CubeGraph& g, const WhitneyDecomposition& w, const Domain& domain,
                   const SpatialIndex& cubes, Point x, Point y);

/// Largest cube containing p; lexicographic (ix, iy) among equals.
std::size_t base_cube(const WhitneyDecomposition& w, Point p);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct ChainTree {
  std::size_t root = 0;
  Point base_point;
  std::vector<std::ptrdiff_t> parent;  // -1 at the root and off its component
  std::vector<int> length;             // l(C(Q)), -1 off the component
  std::vector<double> khat;            // Dijkstra distance from the root
  std::vector<std::size_t> order;      // reachable ids, parents first
  std::vector<std::size_t> child_offsets;
  std::vector<std::size_t> children;

  std::size_t size() const { return parent.size(); }
  std::size_t reachable() const { return order.size(); }
  bool contains(std::size_t i) const { return length[i] >= 0; }
  std::span<const std::size_t> children_of(std::size_t i) const {
    return {children.data() + child_offsets[i], child_offsets[i + 1] - child_offsets[i]};
  }
  /// Cubes of C(Q) from the root to Q.
  std::vector<std::size_t> chain(std::size_t q) const;
};

/// Dijkstra tree from q0 (ties by cube id), then each chain is shortcut: a
/// cube hangs from the earliest cube on its Dijkstra parent's chain whose
/// dilation it meets. Consecutive chain cubes meet, others do not.
ChainTree chain_tree(const CubeGraph& g, const WhitneyDecomposition& w, std::size_t q0);

/// Checks the chain condition for every reachable cube with exact box tests.
bool check_chain_condition(const ChainTree& t, const WhitneyDecomposition& w);

// Shadows -------------------------------------------------------------------

/// |S(Q)| for every cube: the area of Q's subtree. 0 off the component.
std::vector<double> shadow_measures(const ChainTree& t, const WhitneyDecomposition& w);
std::vector<std::size_t> shadow_cubes(const ChainTree& t, std::size_t q);

struct ShadowStats {
  std::vector<double> measure;
  std::vector<int> level;
  std::vector<int> k;  // -1 when unclassified
  double beta = 1.0;
  double sigma = 1.0;
  std::size_t classified = 0;
  std::size_t violations = 0;
  /// max over (j, k) of #W_{j,k} / (j 2^{n(j-k) + j beta (lambda - n)}), j >= 1.
  double counting_ratio = 0.0;
  std::map<std::pair<int, int>, std::size_t> class_counts;

  double coverage() const {
    const std::size_t n = classified + violations;
    return n == 0 ? 1.0 : static_cast<double>(classified) / static_cast<double>(n);
  }
};

/// Assigns each cube the k with 2^{-(j-k)n} <= |S(Q)| <= sigma 2^{-(j-k-1)n}
/// and k <= [j - j beta]. beta above 1 is treated as 1.
ShadowStats classify_levels(const ChainTree& t, const WhitneyDecomposition& w, double beta, double lambda);

// Fits and sums -------------------------------------------------------------

struct QhbcFit {
  double slope = 0.0;
  double intercept = 0.0;
  double beta = 0.0;   // 1 / slope
  double c = 0.0;      // max of khat - slope log(1/d)
  std::size_t used = 0;
  struct Row {
    std::size_t id;
    double log_inv_dist;
    double khat;
    double residual;  // khat - slope log(1/d) - c, never positive
  };
  std::vector<Row> rows;
};

/// Least squares of khat on log(1/dist(x_Q)) over reachable cubes with dist < 1.
QhbcFit qhbc_fit(const ChainTree& t, const CubeGraph& g);

/// sum over Q in S(A) of l(C(Q))^{q-1} |Q| for every A (0^0 = 1).
std::vector<double> shadow_sums(const ChainTree& t, const WhitneyDecomposition& w, double q);

struct ShadowSumRatio {
  double max_ratio = 0.0;  // max over A of sum / |S(A)|^{1-eps}
  std::size_t argmax = 0;
};
ShadowSumRatio shadow_sum_ratio(const ChainTree& t, const WhitneyDecomposition& w, double q, double eps);

struct SigmaSeries {
  std::vector<int> levels;
  std::vector<double> increments;
  std::vector<double> partial_sums;
  double total = 0.0;
  /// (I_last / I_{last-2})^{1/2}; decay iff below 1.
  double decay_ratio = 0.0;
  bool decays() const { return decay_ratio < 1.0; }
};

/// Sum over A of (sum_{Q in S(A)} l(C(Q))^{q-1} |Q| |A|^{q/n - q/p})^{p/(p-q)},
/// accumulated by group. group[i] is the level a cube's term is booked under;
/// an empty group vector books every cube under its own level.
SigmaSeries sigma_chain_sum(const ChainTree& t, const WhitneyDecomposition& w, double q, double p,
                            const std::vector<int>& group = {});

/// Books every cube of a beta-version under the level of the base cube
/// nearest to its center (smallest id among equals).
std::vector<int> apartment_groups(const WhitneyDecomposition& w, const WhitneyDecomposition& base);

/// Lower bound for the John constant certified by the tree paths x_Q -> x0.
double john_constant_estimate(const ChainTree& t, const WhitneyDecomposition& w, const CubeGraph& g,
                              const Domain& domain);

struct ChainConstants {
  double eks = 0.0;          // max #(level-j cubes on C(R)) / j
  double h61_upper = 0.0;    // max l / (khat + 1)
  double h61_lower = 0.0;    // max khat / (l + 1)
  double shadow_diam = 0.0;  // max diam(S(Q)) / diam(Q)^beta
  double comparability() const { return std::max(h61_upper, h61_lower); }
};
ChainConstants chain_constants(const ChainTree& t, const WhitneyDecomposition& w, double beta);

// CSV -----------------------------------------------------------------------

void write_chains_csv(std::ostream& out, const ChainTree& t, const WhitneyDecomposition& w, const CubeGraph& g);
void write_shadows_csv(std::ostream& out, const ShadowStats& s, const ChainTree& t);
void write_qhbc_csv(std::ostream& out, const QhbcFit& f);
void write_sigma_csv(std::ostream& out, const SigmaSeries& s);

}  // namespace qhlab
