// Box counting, Minkowski fits, Whitney census slopes and ball packing.
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qhlab/domains.hpp"
#include "qhlab/geometry.hpp"

namespace qhlab {

/// A compact set given as closed primitives.
struct Primitives {
  std::vector<Box> boxes;
  std::vector<Segment> segments;
  std::vector<Chord> chords;
  std::vector<Point> points;
  std::string descriptor;

  bool empty() const { return boxes.empty() && segments.empty() && chords.empty() && points.empty(); }
  Box bounds() const;
};

/// Boundary of a domain: outer segments, disc as a polygon, holes, walls.
Primitives boundary_primitives(const Domain& d, int circle_sides = 256);
/// The depth-j boxes of a four-corner IFS.
Primitives ifs_primitives(const IfsFourCorner& ifs, int depth);

/// Ratio between an r-cell count times r^2 and the area of the r-neighbourhood.
inline constexpr double kCellBallFactor = 1.0;

/// Number of cells [i r, (i+1) r) x [k r, (k+1) r) meeting the set.
std::size_t box_count(const Primitives& set, double r);

struct BoxCountPoint {
  double r = 0.0;
  std::size_t count = 0;
  double precontent = 0.0;  // count * kCellBallFactor * r^lambda
};

struct BoxCountSeries {
  std::string descriptor;
  double lambda = 1.0;
  std::vector<BoxCountPoint> points;  // r decreasing
};

BoxCountSeries box_count_series(const Primitives& set, std::vector<double> radii, double lambda);

/// r = 2^-1, ..., 2^-levels.
std::vector<double> dyadic_radii(int levels);

struct DimensionEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms
  double scale_min = 0.0;
  double scale_max = 0.0;
  std::size_t used = 0;
};

/// Slope of log N against log(1/r) over the finest half of the scales.
DimensionEstimate minkowski_fit(const BoxCountSeries& series);

/// Slope of log2 #W_j against j over the finest half of the nonzero levels
/// up to max_level (at least three levels).
DimensionEstimate whitney_dim_estimate(const std::map<int, std::size_t>& census, int max_level);

struct Packing {
  std::size_t count = 0;
  std::vector<Point> centers;
};

/// Greedy packing of disjoint open r-balls centred in the set: candidates are
/// r-spaced samples of each primitive in order, accepted at distance >= 2r
/// from every accepted centre.
Packing greedy_ball_pack(const Primitives& set, double r);

void write_boxcount_csv(std::ostream& out, const BoxCountSeries& s);

}  // namespace qhlab
