#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "bdd/common.hpp"

namespace bdd::geometry {

/// Side of the oriented curve, looking along the direction of travel.
enum class Side { left, right };

/// A0 is the control region, A1 the treated region. Points on the boundary
/// belong to A1.
enum class Region { A0, A1 };

/// Oriented piecewise-linear assignment boundary.
///
/// Open boundaries are polylines v0 -> ... -> v_{m-1}; closed boundaries add
/// the segment v_{m-1} -> v0. The constructor validates the curve (at least two
/// distinct consecutive vertices, finite coordinates, no self-intersections)
/// and throws Error(InvalidBoundary) otherwise.
class Boundary {
 public:
  Boundary(std::vector<Point> vertices, bool closed, Side treated_side);

  const std::vector<Point>& vertices() const { return vertices_; }
  bool closed() const { return closed_; }
  Side treated_side() const { return treated_side_; }

  std::size_t segment_count() const { return cumulative_.size() - 1; }
  Point segment_start(std::size_t k) const { return vertices_[k]; }
  Point segment_end(std::size_t k) const { return vertices_[(k + 1) % vertices_.size()]; }
  double segment_length(std::size_t k) const { return cumulative_[k + 1] - cumulative_[k]; }

  /// Running arclength at each segment start, plus |B| as the last entry.
  const std::vector<double>& cumulative_arclength() const { return cumulative_; }
  double length() const { return cumulative_.back(); }

  /// Absolute tolerance for "on the boundary": 1e-9 |B|.
  double tolerance() const { return 1e-9 * length(); }

  /// Point at arclength s (clamped to [0, |B|]).
  Point point_at(double s) const;

  Boundary with_treated_side(Side side) const;

 private:
  std::vector<Point> vertices_;
  bool closed_;
  Side treated_side_;
  std::vector<double> cumulative_;
};

/// Breakpoints 0 = s_0 < s_1 < ... < s_L = |B| splitting the boundary into L
/// pieces, numbered 1..L.
class SegmentPartition {
 public:
  explicit SegmentPartition(std::vector<double> breakpoints);

  /// L pieces of equal arclength.
  static SegmentPartition even(const Boundary& boundary, int pieces);
  /// Interior breakpoints s_1..s_{L-1}; endpoints are added.
  static SegmentPartition from_interior(const Boundary& boundary, std::vector<double> interior);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  int pieces() const { return static_cast<int>(breakpoints_.size()) - 1; }

  /// 1-based piece containing arclength s; shared endpoints go to the lower piece.
  int piece_of_arclength(double s) const;

 private:
  std::vector<double> breakpoints_;
};

struct Projection {
  Point point;
  double arclength = 0.0;
  double distance = 0.0;
  std::size_t segment = 0;
  double t = 0.0;  // position along `segment`, in [0, 1]
};

/// Global nearest point on the boundary; ties go to the smallest arclength.
Projection closest_point(const Boundary& boundary, Point query);

/// Region label using the oriented side of the nearest segment, with an
/// angular-sector rule when the nearest point is an interior vertex.
Region region_of(const Boundary& boundary, Point query);

/// D = +d(q, B) in A1 (including on B), -d(q, B) in A0.
double signed_distance(const Boundary& boundary, Point query);

/// D(x) for a pre-specified anchor x on the boundary. Throws AnchorOffBoundary.
double signed_distance_to_point(const Boundary& boundary, Point anchor, Point query);

/// Projection, region, and signed distance computed in one pass.
struct Location {
  Projection projection;
  Region region = Region::A1;
  double signed_distance = 0.0;
};
Location locate(const Boundary& boundary, Point query);

/// Distance from q to piece `piece` (1-based) of the partition.
double distance_to_piece(const SegmentPartition& partition, const Boundary& boundary, int piece,
                         Point query);

/// Index (1..L) of the nearest piece; exact ties go to the smallest index.
int segment_assign(const SegmentPartition& partition, const Boundary& boundary, Point query);

/// Arclength positions of a J-point evenly spaced grid.
std::vector<double> discretize_arclengths(const Boundary& boundary, int points);
std::vector<Point> discretize(const Boundary& boundary, int points);

/// Integral of m along the boundary w.r.t. arclength over [s_from, s_to],
/// by composite 8-point Gauss-Legendre with about n_quad nodes per unit length.
double line_integral(const Boundary& boundary, const std::function<double(Point)>& m,
                     double n_quad = 200.0, double s_from = 0.0,
                     double s_to = std::numeric_limits<double>::infinity());

/// Smaller angle (radians, in [0, pi]) between the two arms at each interior
/// vertex. Open boundaries have m-2 entries, closed ones m.
std::vector<double> interior_angles(const Boundary& boundary);

/// Angular sector [start, start + extent] (radians, counter-clockwise).
struct Sector {
  double start = 0.0;
  double extent = 0.0;
};

/// Sectors occupied by A1 and A0 in a small disc around a boundary point.
/// For a point inside a segment (or at an open endpoint) both are half discs;
/// at an interior vertex they are the two wedges cut by the incident segments.
struct LocalSectors {
  Sector treated;
  Sector control;
};
LocalSectors local_sectors(const Boundary& boundary, Point on_boundary);

}  // namespace bdd::geometry
