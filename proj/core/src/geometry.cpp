#include "bdd/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace bdd::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Sign of the orientation of (a, b, c).
int orientation(Point a, Point b, Point c) {
  double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x1, b.x1) <= p.x1 && p.x1 <= std::max(a.x1, b.x1) &&
         std::min(a.x2, b.x2) <= p.x2 && p.x2 <= std::max(a.x2, b.x2);
}

bool segments_intersect(Point a, Point b, Point c, Point d) {
  int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

struct SegmentFoot {
  Point point;
  double t;
  double distance;
};

SegmentFoot foot_on_segment(Point a, Point b, Point q) {
  Point d = b - a;
  double t = dot(q - a, d) / dot(d, d);
  if (!(t > 0.0)) return {a, 0.0, distance(q, a)};
  if (!(t < 1.0)) return {b, 1.0, distance(q, b)};
  Point p = a + t * d;
  return {p, t, distance(q, p)};
}

// Counter-clockwise angle from u to v in [0, 2pi).
double ccw_angle(Point u, Point v) {
  double a = std::atan2(cross(u, v), dot(u, v));
  return a < 0.0 ? a + kTwoPi : a;
}

double angle_of(Point v) {
  double a = std::atan2(v.x2, v.x1);
  return a < 0.0 ? a + kTwoPi : a;
}

bool is_interior_vertex(const Boundary& b, std::size_t v) {
  return b.closed() || (v > 0 && v + 1 < b.vertices().size());
}

Point direction(const Boundary& b, std::size_t segment) {
  return b.segment_end(segment) - b.segment_start(segment);
}

Region side_to_region(const Boundary& b, bool left) {
  bool treated_left = b.treated_side() == Side::left;
  return left == treated_left ? Region::A1 : Region::A0;
}

// Left-of-travel test at interior vertex v for offset w = q - v.
bool left_at_vertex(const Boundary& b, std::size_t v, Point w) {
  std::size_t m = b.vertices().size();
  std::size_t seg_in = (v + m - 1) % m;  // closed wrap, or v-1 for open interior
  std::size_t seg_out = v % b.segment_count();
  Point d_in = direction(b, seg_in);
  Point d_out = direction(b, seg_out);
  double left_extent = ccw_angle(d_out, -1.0 * d_in);
  double a = ccw_angle(d_out, w);
  return a > 0.0 && a < left_extent;
}

Region classify(const Boundary& b, const Projection& proj, Point q) {
  if (proj.distance <= b.tolerance()) return Region::A1;
  std::size_t k = proj.segment;
  std::size_t m = b.vertices().size();
  if (proj.t > 0.0 && proj.t < 1.0) {
    return side_to_region(b, cross(direction(b, k), q - proj.point) > 0.0);
  }
  std::size_t v = proj.t == 0.0 ? k : (k + 1) % m;
  if (!is_interior_vertex(b, v)) {
    // Open endpoint: half plane of the end segment.
    return side_to_region(b, cross(direction(b, k), q - proj.point) > 0.0);
  }
  return side_to_region(b, left_at_vertex(b, v, q - b.vertices()[v]));
}

}  // namespace

Boundary::Boundary(std::vector<Point> vertices, bool closed, Side treated_side)
    : vertices_(std::move(vertices)), closed_(closed), treated_side_(treated_side) {
  const std::size_t m = vertices_.size();
  if (m < 2) throw Error(ErrorCode::InvalidBoundary, "need at least 2 vertices");
  if (closed_ && m < 3) throw Error(ErrorCode::InvalidBoundary, "closed boundary needs 3 vertices");
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x1) || !std::isfinite(v.x2)) {
      throw Error(ErrorCode::InvalidBoundary, "non-finite vertex coordinate");
    }
  }
  const std::size_t segs = closed_ ? m : m - 1;
  cumulative_.assign(segs + 1, 0.0);
  for (std::size_t k = 0; k < segs; ++k) {
    double len = distance(vertices_[k], vertices_[(k + 1) % m]);
    if (!(len > 0.0)) {
      throw Error(ErrorCode::InvalidBoundary,
                  "zero-length segment at vertex " + std::to_string(k));
    }
    cumulative_[k + 1] = cumulative_[k] + len;
  }
  // Simplicity: non-adjacent segments must not touch, adjacent ones must not
  // fold back onto each other.
  for (std::size_t i = 0; i < segs; ++i) {
    for (std::size_t j = i + 1; j < segs; ++j) {
      bool adjacent = (j == i + 1) || (closed_ && i == 0 && j == segs - 1);
      Point a = segment_start(i), b = segment_end(i);
      Point c = segment_start(j), d = segment_end(j);
      if (adjacent) {
        // Adjacent segments can only meet at the shared vertex unless they
        // are collinear and point back onto each other.
        Point u = b - a, w = d - c;
        if (cross(u, w) == 0.0 && dot(u, w) < 0.0) {
          throw Error(ErrorCode::InvalidBoundary, "boundary folds back on itself");
        }
        continue;
      }
      if (segments_intersect(a, b, c, d)) {
        throw Error(ErrorCode::InvalidBoundary, "boundary self-intersects (segments " +
                                                    std::to_string(i) + ", " +
                                                    std::to_string(j) + ")");
      }
    }
  }
}

Point Boundary::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t k = it == cumulative_.begin() ? 0 : std::size_t(it - cumulative_.begin()) - 1;
  if (k >= segment_count()) k = segment_count() - 1;
  double t = (s - cumulative_[k]) / segment_length(k);
  if (t <= 0.0) return segment_start(k);
  if (t >= 1.0) return segment_end(k);
  return segment_start(k) + t * (segment_end(k) - segment_start(k));
}

Boundary Boundary::with_treated_side(Side side) const {
  Boundary copy = *this;
  copy.treated_side_ = side;
  return copy;
}

SegmentPartition::SegmentPartition(std::vector<double> breakpoints)
    : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 2) throw Error(ErrorCode::InvalidArgument, "partition needs L >= 1");
  if (breakpoints_.front() != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "partition must start at arclength 0");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "partition breakpoints must be strictly increasing");
    }
  }
}

SegmentPartition SegmentPartition::even(const Boundary& boundary, int pieces) {
  if (pieces < 1) throw Error(ErrorCode::InvalidArgument, "segment count must be >= 1");
  std::vector<double> bp(std::size_t(pieces) + 1);
  for (int l = 0; l <= pieces; ++l) bp[std::size_t(l)] = boundary.length() * l / pieces;
  bp.back() = boundary.length();
  return SegmentPartition(std::move(bp));
}

SegmentPartition SegmentPartition::from_interior(const Boundary& boundary,
                                                 std::vector<double> interior) {
  std::vector<double> bp;
  bp.reserve(interior.size() + 2);
  bp.push_back(0.0);
  bp.insert(bp.end(), interior.begin(), interior.end());
  bp.push_back(boundary.length());
  if (!(bp[bp.size() - 2] < boundary.length())) {
    throw Error(ErrorCode::InvalidArgument, "partition breakpoint beyond boundary length");
  }
  return SegmentPartition(std::move(bp));
}

int SegmentPartition::piece_of_arclength(double s) const {
  auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), s);
  if (it == breakpoints_.end()) return pieces();
  return int(it - breakpoints_.begin());
}

Projection closest_point(const Boundary& boundary, Point query) {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  const auto& cum = boundary.cumulative_arclength();
  for (std::size_t k = 0; k < boundary.segment_count(); ++k) {
    SegmentFoot f = foot_on_segment(boundary.segment_start(k), boundary.segment_end(k), query);
    if (f.distance < best.distance) {
      best.point = f.point;
      best.distance = f.distance;
      best.segment = k;
      best.t = f.t;
      best.arclength = cum[k] + f.t * (cum[k + 1] - cum[k]);
    }
  }
  return best;
}

Location locate(const Boundary& boundary, Point query) {
  Location loc;
  loc.projection = closest_point(boundary, query);
  loc.region = classify(boundary, loc.projection, query);
  loc.signed_distance =
      loc.region == Region::A1 ? loc.projection.distance : -loc.projection.distance;
  return loc;
}

Region region_of(const Boundary& boundary, Point query) { return locate(boundary, query).region; }

double signed_distance(const Boundary& boundary, Point query) {
  return locate(boundary, query).signed_distance;
}

double signed_distance_to_point(const Boundary& boundary, Point anchor, Point query) {
  if (closest_point(boundary, anchor).distance > boundary.tolerance()) {
    throw Error(ErrorCode::AnchorOffBoundary, "anchor is not on the boundary");
  }
  double d = distance(query, anchor);
  return region_of(boundary, query) == Region::A1 ? d : -d;
}

double distance_to_piece(const SegmentPartition& partition, const Boundary& boundary, int piece,
                         Point query) {
  const auto& bp = partition.breakpoints();
  const auto& cum = boundary.cumulative_arclength();
  double lo = bp[std::size_t(piece) - 1], hi = bp[std::size_t(piece)];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < boundary.segment_count(); ++k) {
    double a = std::max(lo, cum[k]);
    double b = std::min(hi, cum[k + 1]);
    if (a > b) continue;
    Point pa = a == cum[k] ? boundary.segment_start(k) : boundary.point_at(a);
    Point pb = b == cum[k + 1] ? boundary.segment_end(k) : boundary.point_at(b);
    double d = a == b ? distance(query, pa) : foot_on_segment(pa, pb, query).distance;
    best = std::min(best, d);
  }
  return best;
}

int segment_assign(const SegmentPartition& partition, const Boundary& boundary, Point query) {
  int best = 1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= partition.pieces(); ++l) {
    double d = distance_to_piece(partition, boundary, l, query);
    if (d < best_d) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

std::vector<double> discretize_arclengths(const Boundary& boundary, int points) {
  const double len = boundary.length();
  std::vector<double> s;
  if (boundary.closed()) {
    if (points < 1) throw Error(ErrorCode::InvalidGrid, "closed boundary needs J >= 1");
    s.resize(std::size_t(points));
    for (int j = 0; j < points; ++j) s[std::size_t(j)] = len * j / points;
  } else {
    if (points < 2) throw Error(ErrorCode::InvalidGrid, "open boundary needs J >= 2");
    s.resize(std::size_t(points));
    for (int j = 0; j < points; ++j) s[std::size_t(j)] = len * j / (points - 1);
    s.back() = len;
  }
  return s;
}

std::vector<Point> discretize(const Boundary& boundary, int points) {
  std::vector<Point> out;
  for (double s : discretize_arclengths(boundary, points)) out.push_back(boundary.point_at(s));
  return out;
}

double line_integral(const Boundary& boundary, const std::function<double(Point)>& m,
                     double n_quad, double s_from, double s_to) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& cum = boundary.cumulative_arclength();
  s_from = std::max(s_from, 0.0);
  s_to = std::min(s_to, boundary.length());
  double total = 0.0;
  for (std::size_t k = 0; k < boundary.segment_count(); ++k) {
    double a = std::max(s_from, cum[k]);
    double b = std::min(s_to, cum[k + 1]);
    if (!(b > a)) continue;
    Point start = boundary.segment_start(k);
    Point dir = (1.0 / boundary.segment_length(k)) * (boundary.segment_end(k) - start);
    auto along = [&](double s) { return m(start + (s - cum[k]) * dir); };
    int panels = std::max(1, int(std::ceil((b - a) * n_quad / 8.0)));
    double width = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
      double lo = a + i * width;
      double hi = i + 1 == panels ? b : lo + width;
      total += Rule::integrate(along, lo, hi);
    }
  }
  return total;
}

std::vector<double> interior_angles(const Boundary& boundary) {
  const auto& v = boundary.vertices();
  const std::size_t m = v.size();
  std::vector<double> out;
  for (std::size_t i = 0; i < m; ++i) {
    if (!is_interior_vertex(boundary, i)) continue;
    Point prev = v[(i + m - 1) % m], next = v[(i + 1) % m];
    Point a = prev - v[i], b = next - v[i];
    out.push_back(std::atan2(std::abs(cross(a, b)), dot(a, b)));
  }
  return out;
}

LocalSectors local_sectors(const Boundary& boundary, Point on_boundary) {
  Projection proj = closest_point(boundary, on_boundary);
  const auto& v = boundary.vertices();
  const std::size_t m = v.size();
  const double tol = boundary.tolerance();

  // Snap to a vertex when within tolerance.
  std::size_t vertex = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (distance(v[i], proj.point) <= tol) {
      vertex = i;
      break;
    }
  }

  Sector left, right;
  if (vertex < m && is_interior_vertex(boundary, vertex)) {
    std::size_t seg_in = (vertex + m - 1) % m;
    std::size_t seg_out = vertex % boundary.segment_count();
    Point d_in = direction(boundary, seg_in);
    Point d_out = direction(boundary, seg_out);
    left.start = angle_of(d_out);
    left.extent = ccw_angle(d_out, -1.0 * d_in);
    right.start = angle_of(-1.0 * d_in);
    right.extent = kTwoPi - left.extent;
  } else {
    std::size_t seg = proj.segment;
    if (vertex < m) seg = vertex == 0 ? 0 : boundary.segment_count() - 1;
    double a = angle_of(direction(boundary, seg));
    left = {a, std::numbers::pi};
    right = {a + std::numbers::pi, std::numbers::pi};
  }
  bool treated_left = boundary.treated_side() == Side::left;
  return treated_left ? LocalSectors{left, right} : LocalSectors{right, left};
}

}  // namespace bdd::geometry
