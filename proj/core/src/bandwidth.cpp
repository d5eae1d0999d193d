#include "bdd/bandwidth.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "bdd/parallel.hpp"
#include "bdd/stats.hpp"

namespace bdd::bandwidth {

namespace {

using regression::KernelKind;

struct Node {
  double x;
  double w;
};

/// Full Gauss-Legendre rule on [a, b] from Boost's half-rule tables.
template <unsigned N>
std::vector<Node> gauss_nodes(double a, double b) {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  std::vector<Node> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0) {
      out.push_back({mid, half * ws[i]});
      continue;
    }
    out.push_back({mid - half * xs[i], half * ws[i]});
    out.push_back({mid + half * xs[i], half * ws[i]});
  }
  return out;
}

/// e0' G^-1 v and e0' G^-1 L G^-1 e0.
KernelConstants intercept_constants(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& lambda,
                                    const Eigen::VectorXd& theta) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gamma);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(gamma.rows());
  e0(0) = 1.0;
  Eigen::VectorXd row = ldlt.solve(e0);
  return {row.dot(theta), row.dot(lambda * row)};
}

std::vector<double> column(const std::vector<Point>& xs, bool first) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = first ? xs[i].x1 : xs[i].x2;
  return out;
}

double cross3(Point o, Point a, Point b) { return cross(a - o, b - o); }

std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](Point a, Point b) { return a.x1 < b.x1 || (a.x1 == b.x1 && a.x2 < b.x2); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross3(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::string format_h(double h) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", h);
  return buf;
}

/// Clamp to the score diameter and record why.
void finalize(BandwidthResult& r, double h_raw, double diameter) {
  if (!std::isfinite(h_raw) || h_raw > diameter) {
    r.h = diameter;
    r.warnings.push_back("plug-in bandwidth " + format_h(h_raw) +
                         " clamped to the score diameter " + format_h(diameter));
  } else {
    r.h = h_raw;
  }
}

/// Area of the disc (c, r) inside the box [lo, hi].
double disc_box_area(Point c, double r, Point lo, Point hi) {
  double a = std::max(c.x1 - r, lo.x1), b = std::min(c.x1 + r, hi.x1);
  if (a >= b) return 0.0;
  constexpr int kPanels = 64;
  double total = 0.0, step = (b - a) / kPanels;
  for (int k = 0; k < kPanels; ++k) {
    for (const Node& n : gauss_nodes<10>(a + k * step, a + (k + 1) * step)) {
      double dx = n.x - c.x1;
      double half = std::sqrt(std::max(0.0, r * r - dx * dx));
      double top = std::min(hi.x2, c.x2 + half), bottom = std::max(lo.x2, c.x2 - half);
      total += n.w * std::max(0.0, top - bottom);
    }
  }
  return total;
}

/// Kernel moment matrices over one angular sector of the unit disc for the
/// basis (1, r_p(u)), and the bias vector against the degree-(p+1) Taylor
/// terms sum_alpha c_alpha u^alpha.
KernelConstants sector_constants(KernelKind kernel, int p, geometry::Sector sector,
                                 const std::vector<double>& taylor) {
  const int k = 1 + regression::basis_biv_size(p);
  const auto top = regression::basis_biv_exponents(p + 1);
  const std::size_t first_top = std::size_t(regression::basis_biv_size(p));
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(k, k), lambda = gamma;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd r(k);
  const auto radial = gauss_nodes<20>(0.0, 1.0);
  // Split the angle so each panel spans at most a quarter turn.
  const int panels = std::max(1, int(std::ceil(sector.extent / (std::numbers::pi / 2.0))));
  const double step = sector.extent / panels;
  for (int a = 0; a < panels; ++a) {
    for (const Node& ang : gauss_nodes<20>(sector.start + a * step, sector.start + (a + 1) * step)) {
      const double c = std::cos(ang.x), s = std::sin(ang.x);
      for (const Node& rad : radial) {
        const double kw = regression::kernel_profile(kernel, rad.x);
        const double w = ang.w * rad.w * rad.x;
        Point u{rad.x * c, rad.x * s};
        r(0) = 1.0;
        auto b = regression::basis_biv(u, p);
        for (int j = 0; j < k - 1; ++j) r(j + 1) = b[std::size_t(j)];
        double m = 0.0;
        for (std::size_t t = 0; t < taylor.size(); ++t) {
          auto [e1, e2] = top[first_top + t];
          m += taylor[t] * std::pow(u.x1, e1) * std::pow(u.x2, e2);
        }
        gamma.noalias() += (w * kw) * r * r.transpose();
        lambda.noalias() += (w * kw * kw) * r * r.transpose();
        theta += (w * kw * m) * r;
      }
    }
  }
  return intercept_constants(gamma, lambda, theta);
}

BandwidthResult location_fallback(const SampleFrame& frame, int p, std::string why) {
  BandwidthResult r;
  const auto x1 = column(frame.x, true), x2 = column(frame.x, false);
  const double n = double(frame.size());
  double sd = n >= 2 ? std::sqrt(0.5 * (stats::variance(x1) + stats::variance(x2))) : 0.0;
  r.exponent = 1.0 / (2.0 * p + 4.0);
  r.pilot_order = p + 2;
  r.fallback = true;
  r.warnings.push_back("pilot degenerate (" + why + "); rule-of-thumb bandwidth used");
  double h = sd * std::pow(std::max(n, 1.0), -r.exponent);
  double diam = score_diameter(frame);
  if (!(h > 0.0)) h = diam;
  finalize(r, h, diam);
  return r;
}

void require_pilot(const SampleFrame& frame, int p, const PilotOptions& options) {
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "polynomial order must be nonnegative");
  if (frame.size() < options.min_pilot) {
    throw Error(ErrorCode::InsufficientData, "bandwidth pilot needs at least " +
                                                 std::to_string(options.min_pilot) +
                                                 " observations");
  }
  if (score_diameter(frame) <= 0.0) {
    throw Error(ErrorCode::InsufficientData, "observed scores have zero spread");
  }
}

}  // namespace

double plug_in_h(double bias_constant, double variance_constant, std::size_t n, int p, int dim) {
  const double exponent = 1.0 / (2.0 * p + 2.0 + dim);
  return std::pow(dim * variance_constant /
                      (2.0 * (p + 1) * bias_constant * bias_constant * double(n)),
                  exponent);
}

KernelConstants univariate_constants(KernelKind kernel, int p) {
  const int k = p + 1;
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(k, k), lambda = gamma;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  for (const Node& n : gauss_nodes<20>(0.0, 1.0)) {
    const double kw = regression::kernel_profile(kernel, n.x);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        gamma(a, b) += n.w * kw * std::pow(n.x, a + b);
        lambda(a, b) += n.w * kw * kw * std::pow(n.x, a + b);
      }
      theta(a) += n.w * kw * std::pow(n.x, a + p + 1);
    }
  }
  return intercept_constants(gamma, lambda, theta);
}

double score_diameter(const SampleFrame& frame) {
  auto hull = convex_hull(frame.x);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, distance(hull[i], hull[j]));
  }
  if (best > 0.0 || frame.distance.empty()) return best;
  auto [lo, hi] = std::minmax_element(frame.distance.begin(), frame.distance.end());
  return *hi - *lo;
}

BandwidthResult h_mse_pooled(const SampleFrame& frame, int p, KernelKind kernel,
                             const PilotOptions& options) {
  require_pilot(frame, p, options);
  const std::size_t n = frame.size();
  const double diam = score_diameter(frame);
  const double sd = std::sqrt(stats::variance(frame.distance));

  BandwidthResult r;
  r.exponent = 1.0 / (2.0 * p + 3.0);
  r.pilot_order = p + 2;
  auto fallback = [&](const std::string& why) {
    r.fallback = true;
    r.warnings.push_back("pilot degenerate (" + why + "); rule-of-thumb bandwidth used");
    finalize(r, sd * std::pow(double(n), -r.exponent), diam);
    return r;
  };

  const int q = p + 2;
  double lead[2] = {0.0, 0.0}, sigma2[2] = {0.0, 0.0}, dens[2] = {0.0, 0.0};
  const double b = 1.06 * sd * std::pow(double(n), -0.2);
  for (int side = 0; side < 2; ++side) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (frame.treated[i] == side) idx.push_back(i);
    }
    if (idx.size() < std::size_t(q + 2)) return fallback("too few observations on one side");
    Eigen::MatrixXd Z(idx.size(), q + 1);
    Eigen::VectorXd Y(idx.size());
    for (std::size_t r_ = 0; r_ < idx.size(); ++r_) {
      const double d = frame.distance[idx[r_]];
      double pw = 1.0;
      for (int j = 0; j <= q; ++j, pw *= d) Z(Eigen::Index(r_), j) = pw;
      Y(Eigen::Index(r_)) = frame.y[idx[r_]];
    }
    regression::WlsFit fit;
    try {
      fit = regression::wls(Z, Y, Eigen::VectorXd::Ones(Z.rows()), {regression::Vce::HC0});
    } catch (const Error&) {
      return fallback("polynomial pilot could not be fitted");
    }
    if (!fit.retained(p + 1)) return fallback("pilot coefficient not identified");
    lead[side] = fit.coefficients(p + 1);
    sigma2[side] = fit.residuals.squaredNorm() / double(idx.size() - std::size_t(fit.retained_count()));
    std::size_t near = 0;
    for (std::size_t i : idx) {
      const double d = frame.distance[i];
      if (side == 1 ? d < b : d > -b) ++near;
    }
    dens[side] = double(near) / (double(n) * b);
    if (!(dens[side] > 0.0)) return fallback("no observations near the boundary");
  }

  const KernelConstants kc = univariate_constants(kernel, p);
  const double control_sign = (p + 1) % 2 == 0 ? 1.0 : -1.0;
  r.bias_constant = kc.bias * (lead[1] - control_sign * lead[0]);
  r.variance_constant = kc.variance * (sigma2[1] / dens[1] + sigma2[0] / dens[0]);
  if (!std::isfinite(r.bias_constant) || !std::isfinite(r.variance_constant) ||
      !(r.variance_constant > 0.0)) {
    return fallback("nonfinite plug-in constants");
  }
  finalize(r, plug_in_h(r.bias_constant, r.variance_constant, n, p, 1), diam);
  return r;
}

PointConstants location_constants(const SampleFrame& frame, const geometry::Boundary& boundary,
                                  Point b, int p, KernelKind kernel,
                                  const PilotOptions& options) {
  PointConstants out;
  const std::size_t n = frame.size();
  const int q = p + 2;
  const int params = 1 + regression::basis_biv_size(q);

  // Nearest share of the sample to b.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t keep = std::min(n, std::size_t(std::ceil(options.neighborhood_fraction * double(n))));
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = distance(frame.x[i], b);
  std::nth_element(order.begin(), order.begin() + std::ptrdiff_t(keep) - 1, order.end(),
                   [&](std::size_t a, std::size_t c) {
                     return dist[a] < dist[c] || (dist[a] == dist[c] && a < c);
                   });
  order.resize(keep);
  std::sort(order.begin(), order.end());

  const auto sectors = geometry::local_sectors(boundary, b);
  const std::size_t first_top = std::size_t(regression::basis_biv_size(p));
  const std::size_t top_terms = std::size_t(p + 2);
  double bias[2] = {0.0, 0.0}, var[2] = {0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    std::vector<std::size_t> idx;
    for (std::size_t i : order) {
      if (frame.treated[i] == side) idx.push_back(i);
    }
    if (idx.size() < std::size_t(params + 2)) return out;
    Eigen::MatrixXd Z(idx.size(), params);
    Eigen::VectorXd Y(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      Z(Eigen::Index(r), 0) = 1.0;
      auto basis = regression::basis_biv(frame.x[idx[r]] - b, q);
      for (int j = 0; j < params - 1; ++j) Z(Eigen::Index(r), j + 1) = basis[std::size_t(j)];
      Y(Eigen::Index(r)) = frame.y[idx[r]];
    }
    regression::WlsFit fit;
    try {
      fit = regression::wls(Z, Y, Eigen::VectorXd::Ones(Z.rows()), {regression::Vce::HC0});
    } catch (const Error&) {
      return out;
    }
    std::vector<double> taylor(top_terms);
    for (std::size_t t = 0; t < top_terms; ++t) {
      taylor[t] = fit.coefficients(Eigen::Index(1 + first_top + t));
    }
    const double s2 =
        fit.residuals.squaredNorm() / double(idx.size() - std::size_t(fit.retained_count()));
    const auto kc = sector_constants(kernel, p, side == 1 ? sectors.treated : sectors.control, taylor);
    bias[side] = kc.bias;
    var[side] = s2 * kc.variance;
  }

  // Density of X at b from a disc count, corrected for the part of the disc
  // outside the observed bounding box.
  Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point hi{-lo.x1, -lo.x2};
  for (const Point& x : frame.x) {
    lo = {std::min(lo.x1, x.x1), std::min(lo.x2, x.x2)};
    hi = {std::max(hi.x1, x.x1), std::max(hi.x2, x.x2)};
  }
  const auto x1 = column(frame.x, true), x2 = column(frame.x, false);
  const double radius =
      std::sqrt(stats::variance(x1) + stats::variance(x2)) * std::pow(double(n), -1.0 / 6.0);
  std::size_t inside = 0;
  for (double d : dist) inside += d <= radius;
  const double area = disc_box_area(b, radius, lo, hi);
  if (inside == 0 || !(area > 0.0)) return out;
  const double f = double(inside) / (double(n) * area);

  out.bias = bias[1] - bias[0];
  out.variance = (var[1] + var[0]) / f;
  out.ok = std::isfinite(out.bias) && std::isfinite(out.variance) && out.variance > 0.0;
  return out;
}

BandwidthResult h_mse_location(const SampleFrame& frame, const geometry::Boundary& boundary,
                               Point b, int p, KernelKind kernel, const PilotOptions& options) {
  return h_mse_integrated(frame, boundary, {b}, p, kernel, options);
}

BandwidthResult h_mse_integrated(const SampleFrame& frame, const geometry::Boundary& boundary,
                                 const std::vector<Point>& grid, int p, KernelKind kernel,
                                 const PilotOptions& options) {
  require_pilot(frame, p, options);
  if (grid.empty()) throw Error(ErrorCode::InvalidGrid, "grid is empty");
  std::vector<PointConstants> pc(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) {
    pc[j] = location_constants(frame, boundary, grid[j], p, kernel, options);
  });

  double sum_b2 = 0.0, sum_v = 0.0;
  std::size_t used = 0;
  for (const auto& c : pc) {
    if (!c.ok) continue;
    sum_b2 += c.bias * c.bias;
    sum_v += c.variance;
    ++used;
  }
  auto warn = regularity_warnings(boundary, options.angle_threshold);
  BandwidthResult r;
  if (used == 0) {
    r = location_fallback(frame, p, "no grid point supports a local pilot fit");
  } else {
    r.exponent = 1.0 / (2.0 * p + 4.0);
    r.pilot_order = p + 2;
    r.bias_constant = std::sqrt(sum_b2 / double(used));
    r.variance_constant = sum_v / double(used);
    if (used < grid.size()) {
      r.warnings.push_back(std::to_string(grid.size() - used) +
                           " grid point(s) skipped: local pilot degenerate");
    }
    finalize(r, plug_in_h(r.bias_constant, r.variance_constant, frame.size(), p, 2),
             score_diameter(frame));
  }
  r.warnings.insert(r.warnings.end(), warn.begin(), warn.end());
  return r;
}

std::vector<std::string> regularity_warnings(const geometry::Boundary& boundary,
                                             double angle_threshold) {
  std::vector<std::string> out;
  for (double a : geometry::interior_angles(boundary)) {
    if (a < angle_threshold) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "boundary has an interior angle of %.1f degrees; location-based MSE "
                    "expansions assume a regular boundary",
                    a * 180.0 / std::numbers::pi);
      out.emplace_back(buf);
    }
  }
  return out;
}

}  // namespace bdd::bandwidth
