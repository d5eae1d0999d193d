#include "bdd/tube.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "bdd/stats.hpp"

namespace bdd::tube {

namespace {

struct Span {
  double lo;
  double hi;
};

/// x-extent of {x : dist((x, y), [a, b]) <= r} on the horizontal line at y.
/// The capsule is convex, so the extent is the hull of the two end discs and
/// the central rectangle cut by the line.
bool capsule_row(Point a, Point b, double r, double y, Span& out) {
  double lo = INFINITY, hi = -INFINITY;
  for (Point c : {a, b}) {
    const double dy = y - c.x2;
    if (std::abs(dy) <= r) {
      const double half = std::sqrt(r * r - dy * dy);
      lo = std::min(lo, c.x1 - half);
      hi = std::max(hi, c.x1 + half);
    }
  }
  const Point d = b - a;
  const double len = norm(d);
  const Point n{-d.x2 / len * r, d.x1 / len * r};
  const Point corners[4] = {a + n, b + n, b - n, a - n};
  for (int k = 0; k < 4; ++k) {
    Point p = corners[k], q = corners[(k + 1) % 4];
    if ((p.x2 - y) * (q.x2 - y) > 0.0) continue;
    if (p.x2 == q.x2) {
      lo = std::min({lo, p.x1, q.x1});
      hi = std::max({hi, p.x1, q.x1});
    } else {
      const double t = (y - p.x2) / (q.x2 - p.x2);
      const double x = p.x1 + t * (q.x1 - p.x1);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (lo > hi) return false;
  out = {lo, hi};
  return true;
}

double unit_integral(const std::function<double(double)>& g) {
  // Composite rule: g may be discontinuous (indicator kernels).
  constexpr int kPanels = 64;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    total += boost::math::quadrature::gauss<double, 10>::integrate(
        g, double(k) / kPanels, double(k + 1) / kPanels);
  }
  return total;
}

}  // namespace

double tube_integral(const geometry::Boundary& boundary, Box support,
                     const std::function<double(Point)>& m,
                     const std::function<double(double)>& g, double h, double cells_per_h,
                     std::size_t* cells) {
  if (!(h > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "h must be positive");
  if (!(cells_per_h > 0.0)) throw Error(ErrorCode::InvalidArgument, "cells_per_h must be positive");
  const double c = h / cells_per_h;
  const Point anchor = boundary.vertices().front();
  const double margin = h + c;  // any cell whose centre is in the tube meets this capsule

  double ylo = INFINITY, yhi = -INFINITY;
  for (const Point& v : boundary.vertices()) {
    ylo = std::min(ylo, v.x2 - margin);
    yhi = std::max(yhi, v.x2 + margin);
  }
  ylo = std::max(ylo, support.lo.x2);
  yhi = std::min(yhi, support.hi.x2);

  stats::CompensatedSum sum;
  std::size_t used = 0;
  const long row_first = long(std::floor((ylo - anchor.x2) / c));
  const long row_last = long(std::ceil((yhi - anchor.x2) / c));
  std::vector<Span> spans;
  for (long row = row_first; row < row_last; ++row) {
    const double y0 = std::max(anchor.x2 + double(row) * c, support.lo.x2);
    const double y1 = std::min(anchor.x2 + double(row + 1) * c, support.hi.x2);
    if (!(y1 > y0)) continue;
    const double yc = 0.5 * (y0 + y1);

    spans.clear();
    for (std::size_t k = 0; k < boundary.segment_count(); ++k) {
      Span s;
      if (capsule_row(boundary.segment_start(k), boundary.segment_end(k), margin, yc, s)) {
        spans.push_back({std::max(s.lo - c, support.lo.x1), std::min(s.hi + c, support.hi.x1)});
      }
    }
    std::sort(spans.begin(), spans.end(), [](Span a, Span b) { return a.lo < b.lo; });
    long next_col = std::numeric_limits<long>::min();
    for (const Span& s : spans) {
      if (!(s.hi > s.lo)) continue;
      long col = std::max(next_col, long(std::floor((s.lo - anchor.x1) / c)));
      const long col_end = long(std::ceil((s.hi - anchor.x1) / c));
      for (; col < col_end; ++col) {
        const double x0 = std::max(anchor.x1 + double(col) * c, support.lo.x1);
        const double x1 = std::min(anchor.x1 + double(col + 1) * c, support.hi.x1);
        if (!(x1 > x0)) continue;
        const Point centre{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
        const double d = geometry::closest_point(boundary, centre).distance;
        if (d > h) continue;
        sum.add(g(d / h) * m(centre) * (x1 - x0) * (y1 - y0));
        ++used;
      }
      next_col = std::max(next_col, col_end);
    }
  }
  if (cells) *cells = used;
  return sum.value() / h;
}

std::vector<LimitRow> verify_tube_limit(const geometry::Boundary& boundary, Box support,
                                        const std::function<double(Point)>& m,
                                        const std::function<double(double)>& g,
                                        const std::vector<double>& hs, double cells_per_h,
                                        double c_b) {
  const double rhs = c_b * unit_integral(g) * geometry::line_integral(boundary, m);
  std::vector<LimitRow> out;
  for (double h : hs) {
    LimitRow row;
    row.h = h;
    row.lhs = tube_integral(boundary, support, m, g, h, cells_per_h, &row.cells);
    row.rhs = rhs;
    row.rel_error = std::abs(row.lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    out.push_back(row);
  }
  return out;
}

}  // namespace bdd::tube
