// Whitney decomposition of a Domain and the dilated-cube intersection graph.
#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "qhlab/domains.hpp"
#include "qhlab/geometry.hpp"

namespace qhlab {

inline constexpr double kWhitneyDilation = 9.0 / 8.0;

struct WhitneyCube {
  DyadicCube cube;
  double dist = 0.0;  // dist(Q, boundary), exact
};

struct WhitneyDecomposition {
  DyadicLattice lattice;
  std::vector<WhitneyCube> cubes;  // sorted by (level, ix, iy)
  std::map<int, std::vector<std::size_t>> levels;
  std::vector<WhitneyCube> truncated;  // sub-resolution cubes meeting the domain
  int max_level = 0;                  // the global cap J_max
  Provenance provenance;

  std::size_t size() const { return cubes.size(); }
  Box box(std::size_t i) const { return cube_box(lattice, cubes[i].cube); }
  Box dilated_box(std::size_t i) const { return box(i).dilated(kWhitneyDilation); }
  double side(std::size_t i) const { return cube_side(lattice, cubes[i].cube.level); }
  double area(std::size_t i) const { return side(i) * side(i); }
  Point center(std::size_t i) const { return box(i).center(); }
  /// j with side = 2^-j; integral when the root side is a power of two.
  int scale_level(std::size_t i) const;
};

struct WhitneyOptions {
  std::size_t max_cubes = 4'000'000;  // memory cap on visited cubes
  bool use_hints = true;
};

/// Top-down dyadic subdivision from the root cube: a cube is accepted when it
/// lies in the domain with dist(Q, boundary) >= diam(Q); its parent has
/// necessarily failed, which gives dist(Q, boundary) <= 4 diam(Q).
WhitneyDecomposition whitney_decompose(const Domain& domain, int j_max, const WhitneyOptions& opts = {});

/// Root cube: lower-left corner at the bounding box corner, side the smallest
/// power of two covering the box.
DyadicLattice root_lattice(const Box& bounds);

/// Census keyed by scale level.
std::map<int, std::size_t> level_counts(const WhitneyDecomposition& w);

struct WhitneyCheck {
  bool two_sided_bound = true;
  bool disjoint = true;
  bool inside = true;
  std::size_t max_overlap = 0;  // most dilated cubes covering one sampled point
  std::size_t samples = 0;
};

/// Two-sided bound and disjointness exactly, overlap at random member points.
WhitneyCheck check_whitney(const WhitneyDecomposition& w, const Domain& domain, std::size_t samples,
                           unsigned long long seed);

struct CoverageDeficit {
  double measure = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo measure of member points covered by no accepted cube.
CoverageDeficit coverage_deficit(const WhitneyDecomposition& w, const Domain& domain, std::size_t samples,
                                 unsigned long long seed);

/// Index of the accepted cube containing p (smallest id), or -1.
std::ptrdiff_t host_cube(const WhitneyDecomposition& w, const SpatialIndex& cube_index, Point p);
SpatialIndex cube_index(const WhitneyDecomposition& w);

// ---------------------------------------------------------------------------

/// Undirected graph on cube ids; edge iff the closed 9/8-dilations meet.
struct CubeGraph {
  std::vector<std::size_t> offsets;  // CSR, size n+1
  std::vector<std::size_t> targets;
  std::vector<double> weights;       // parallel to targets
  std::vector<double> node_dist;     // dist(x_Q, boundary), filled with weights

  std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t edge_count() const { return targets.size() / 2; }
  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {targets.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  std::span<const double> neighbor_weights(std::size_t i) const {
    return {weights.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

CubeGraph build_cube_graph(const WhitneyDecomposition& w);

// Files ---------------------------------------------------------------------

/// "whitney v1" rows: j ix iy dist trunc_flag.
void write_whitney(std::ostream& out, const WhitneyDecomposition& w);
void write_census_csv(std::ostream& out, const WhitneyDecomposition& w);

}  // namespace qhlab
