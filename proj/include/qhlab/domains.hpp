// Planar domains served as membership + boundary-distance oracles.
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhlab/geometry.hpp"

namespace qhlab {

struct WhitneyDecomposition;

/// Four-corner iterated function system S_i(x) = r x + z_i on [-1,1]^2.
struct IfsFourCorner {
  double kappa = 0.5;
  double ratio = 0.25;
  std::array<Point, 4> centers{};
  Box base{{-1.0, -1.0}, {1.0, 1.0}};
  double dimension = 1.0;
};

/// Chooses kappa so the attractor has box dimension lambda in [1, 2).
IfsFourCorner make_four_corner_ifs(double lambda);

inline constexpr std::size_t kIfsBoxCap = std::size_t{1} << 22;

/// The 4^depth boxes S_{i1} o ... o S_{ij}(base), ordered by address.
std::vector<Box> ifs_iterate(const IfsFourCorner& ifs, int depth, std::size_t cap = kIfsBoxCap);

struct Circle {
  Point center;
  double radius = 1.0;
  int sign = 1;  // +1: the domain lies inside the circle
};

/// Builder name and parameters, written into every report.
struct Provenance {
  std::string builder;
  std::map<std::string, std::string> params;
};

/// Region where the Whitney refinement may go below the global level cap:
/// cubes within reach * side of the segment keep subdividing while their
/// side exceeds min_side.
struct RefinementHint {
  Segment axis;
  double min_side = 0.0;
  double reach = 6.0;
};

/// Open planar domain
///   (interior of a union of boxes, or an open disc) minus closed holes minus wall segments.
/// Boundary distances are exact; certified_error() is 0.
class Domain {
 public:
  enum class Outer { BoxUnion, Disc };

  Domain() = default;

  bool contains(Point p) const;
  double boundary_distance(Point p) const;
  /// Distance from a closed box to the boundary.
  double box_boundary_distance(const Box& b) const;
  /// Box lies inside one closed hole.
  bool box_in_hole(const Box& b) const;
  /// Closed segment meets a hole, a wall or the outer boundary.
  bool segment_blocked(const Segment& s) const;

  Box bounds() const { return bounds_; }
  double certified_error() const { return 0.0; }
  double scale() const { return scale_; }
  const Provenance& provenance() const { return provenance_; }
  Point distinguished_point() const { return distinguished_; }

  Outer outer() const { return outer_; }
  const std::vector<Box>& union_boxes() const { return union_boxes_; }
  const std::vector<Segment>& outer_segments() const { return outer_segments_; }
  const std::optional<Circle>& disc() const { return disc_; }
  const std::vector<Box>& holes() const { return holes_; }
  const std::vector<Segment>& walls() const { return walls_; }
  const std::vector<RefinementHint>& hints() const { return hints_; }
  const SpatialIndex& hint_index() const { return hint_index_; }
  /// Ids of walls whose bounding boxes meet the region.
  std::vector<std::size_t> walls_in(const Box& region) const { return wall_index_.query(region); }

  /// Boundary as primitives: outer segments, disc chords, holes, walls.
  std::vector<Box> boundary_boxes() const;
  std::vector<Chord> boundary_chords(int circle_sides = 256) const;

  // Builders ---------------------------------------------------------------
  static Domain box_union(std::vector<Box> boxes, Provenance prov);
  static Domain disc_minus_holes(Circle disc, std::vector<Box> holes, Provenance prov);
  /// Same domain with extra walls and hints; used by the beta-version surgery.
  Domain with_walls(std::vector<Segment> walls, std::vector<RefinementHint> hints, Provenance prov) const;

 private:
  friend Domain read_domain(std::istream& in);

  void index_all();
  double outer_distance(Point p) const;
  double outer_box_distance(const Box& b) const;

  Outer outer_ = Outer::BoxUnion;
  std::vector<Box> union_boxes_;
  std::vector<Segment> outer_segments_;
  std::optional<Circle> disc_;
  std::vector<Box> holes_;
  std::vector<Segment> walls_;
  std::vector<RefinementHint> hints_;

  SpatialIndex union_index_;
  SpatialIndex outer_index_;
  SpatialIndex hole_index_;
  SpatialIndex wall_index_;
  SpatialIndex hint_index_;

  Box bounds_ = Box::empty();
  double scale_ = 1.0;
  Provenance provenance_;
  Point distinguished_{};
};

/// B(0,2) minus the level-depth approximation of the four-corner fractal.
Domain build_disk_minus_fractal(double lambda, int depth);

/// Interior of a union of boxes. Rejects unions that are not connected through
/// faces. Geometry with diameter above 4 is rescaled by a power of two.
Domain build_box_union(const std::vector<Box>& boxes);

/// Unit square and the L-shape [0,2]x[0,1] u [0,1]x[1,2].
Domain unit_square();
Domain l_shape();

// ---------------------------------------------------------------------------
// beta-version surgery

struct ApartmentGeometry {
  Point center;
  double side = 0.0;
  double beta = 1.0;
  double passage_half_width = 0.0;  // (side/8)^(1/beta)
  Box room;                         // open
  Box passage;                      // open
  Box long_passage;                 // open
  Box envelope;                     // open
  std::vector<Segment> walls;
};

/// Room, passage, long passage, envelope and walls of a cube with the given
/// center and side. Rejects side > 4 and beta outside (0, 1].
ApartmentGeometry apartment_geometry(Point center, double side, double beta);

struct BetaVersionDomain {
  Domain domain;
  double beta = 1.0;
  std::vector<ApartmentGeometry> apartments;  // one per base Whitney cube
  int base_levels = 0;
};

/// Passages narrower than this get no refinement hint (below double resolution
/// for coordinates of order one).
inline constexpr double kMinHintWidth = 0x1p-34;
inline constexpr double kHintReach = 3.0;

BetaVersionDomain build_beta_version(const Domain& base, const WhitneyDecomposition& w, double beta);

// ---------------------------------------------------------------------------
// Domain files ("domain v1")

void write_domain(std::ostream& out, const Domain& d);
Domain read_domain(std::istream& in);

}  // namespace qhlab
