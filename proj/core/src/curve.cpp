#include "bdd/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "bdd/parallel.hpp"
#include "bdd/rng.hpp"
#include "bdd/stats.hpp"

namespace bdd::curve {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointFit {
  bool ok = false;
  double tau = kNaN;
  double se = kNaN;
  std::size_t effective_n = 0;
  /// (row, influence) pairs sorted by row.
  std::vector<std::pair<std::size_t, double>> psi;
  std::string message;
};

PointFit fit_point(Method method, const SampleFrame& frame, Point b, int p, double h,
                   const CurveOptions& options) {
  PointFit out;
  std::vector<std::size_t> rows;
  std::vector<double> weights;
  bool side_seen[2] = {false, false};
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double w = regression::kernel_weight(options.kernel, frame.x[i] - b, h);
    if (w > 0.0) {
      rows.push_back(i);
      weights.push_back(w);
      side_seen[frame.treated[i]] = true;
    }
  }
  if (!side_seen[0] || !side_seen[1]) {
    out.message = "empty window on one side";
    return out;
  }

  const int k = method == Method::distance ? p : regression::basis_biv_size(p);
  Eigen::MatrixXd Z(rows.size(), 2 + 2 * k);
  Eigen::VectorXd Y(rows.size()), W(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    const double t = frame.treated[i];
    std::vector<double> basis;
    if (method == Method::distance) {
      const double d = distance(frame.x[i], b);
      basis = regression::basis_uni(t > 0 ? d : -d, p);
    } else {
      basis = regression::basis_biv(frame.x[i] - b, p);
    }
    const auto row = Eigen::Index(r);
    Z(row, 0) = 1.0;
    Z(row, 1) = t;
    for (int j = 0; j < k; ++j) {
      Z(row, 2 + j) = basis[std::size_t(j)];
      Z(row, 2 + k + j) = t * basis[std::size_t(j)];
    }
    Y(row) = frame.y[i];
    W(row) = weights[r];
  }

  regression::WlsFit fit;
  try {
    fit = regression::wls(Z, Y, W, {options.vce});
  } catch (const Error& e) {
    out.message = e.what();
    return out;
  }
  if (!fit.retained(1)) {
    out.message = "treatment coefficient not identified";
    return out;
  }
  out.ok = true;
  out.tau = fit.coefficients(1);
  out.se = std::sqrt(std::max(0.0, fit.covariance(1, 1)));
  out.effective_n = fit.effective_n;
  Eigen::VectorXd psi = regression::influence(fit, Z, 1);
  out.psi.reserve(fit.rows.size());
  for (std::size_t r = 0; r < fit.rows.size(); ++r) {
    out.psi.emplace_back(rows[fit.rows[r]], psi(Eigen::Index(r)));
  }
  return out;
}

double overlap(const PointFit& a, const PointFit& b) {
  double s = 0.0;
  auto ia = a.psi.begin(), ib = b.psi.begin();
  while (ia != a.psi.end() && ib != b.psi.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      s += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return s;
}

std::vector<double> bandwidths(const GridSpec& grid, const CurveOptions& options) {
  std::vector<double> h(grid.size(), options.h);
  if (!options.h_per_point.empty()) {
    if (options.h_per_point.size() != grid.size()) {
      throw Error(ErrorCode::InvalidArgument, "h_per_point must have one entry per grid point");
    }
    h = options.h_per_point;
  }
  for (double v : h) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive and finite");
    }
  }
  return h;
}

std::vector<PointFit> fit_all(Method method, const SampleFrame& frame, const GridSpec& grid,
                              int p, const std::vector<double>& h, const CurveOptions& options) {
  std::vector<PointFit> fits(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t j) { fits[j] = fit_point(method, frame, grid.points[j], p, h[j], options); },
      options.threads);
  return fits;
}

/// Fills se, cov, pointwise intervals and band from `fits`, centred on `center`.
void attach_inference(CurveResult& out, const std::vector<PointFit>& fits,
                      const std::vector<double>& center, const CurveOptions& options) {
  const std::size_t J = fits.size();
  out.cov = Eigen::MatrixXd::Constant(Eigen::Index(J), Eigen::Index(J), kNaN);
  out.se.assign(J, kNaN);
  out.ci_pointwise.assign(J, Interval{kNaN, kNaN});
  const double z = stats::normal_critical(options.alpha);
  for (std::size_t j = 0; j < J; ++j) {
    if (!out.valid[j]) continue;
    for (std::size_t k = 0; k <= j; ++k) {
      if (!out.valid[k]) continue;
      const double c = overlap(fits[j], fits[k]);
      out.cov(Eigen::Index(j), Eigen::Index(k)) = c;
      out.cov(Eigen::Index(k), Eigen::Index(j)) = c;
    }
    out.se[j] = std::sqrt(std::max(0.0, out.cov(Eigen::Index(j), Eigen::Index(j))));
    out.ci_pointwise[j] = {center[j] - z * out.se[j], center[j] + z * out.se[j]};
  }
  out.alpha = options.alpha;
  out.seed = options.seed;
  out.n_draws = options.n_draws;
  if (std::find(out.valid.begin(), out.valid.end(), true) == out.valid.end()) {
    out.band.assign(J, Interval{kNaN, kNaN});
    out.crit = kNaN;
    return;
  }
  Band band = uniform_band(out, options.alpha, options.n_draws, options.seed);
  out.crit = band.crit;
  out.band = std::move(band.intervals);
}

CurveResult skeleton(Method method, const GridSpec& grid, int p, const std::vector<double>& h,
                     const std::vector<PointFit>& fits, const CurveOptions& options) {
  CurveResult out;
  out.method = method;
  out.points = grid.points;
  out.arclengths = grid.arclengths;
  out.p = p;
  out.kernel = options.kernel;
  out.vce = options.vce;
  out.h_per_point = h;
  for (std::size_t j = 0; j < fits.size(); ++j) {
    out.tau_hat.push_back(fits[j].tau);
    out.valid.push_back(fits[j].ok);
    out.effective_n.push_back(fits[j].effective_n);
    if (!fits[j].ok) {
      ++out.n_missing;
      out.messages.push_back("grid point " + std::to_string(j) + ": " + fits[j].message);
    }
  }
  return out;
}

void check_order(int p) {
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "polynomial order must be nonnegative");
}

}  // namespace

GridSpec GridSpec::on(const geometry::Boundary& boundary, int points) {
  if (points < 2) throw Error(ErrorCode::InvalidGrid, "grid needs at least two points");
  GridSpec g;
  g.arclengths = geometry::discretize_arclengths(boundary, points);
  for (double s : g.arclengths) g.points.push_back(boundary.point_at(s));
  return g;
}

GridSpec GridSpec::at(const geometry::Boundary& boundary, std::vector<Point> points) {
  if (points.empty()) throw Error(ErrorCode::InvalidGrid, "grid is empty");
  GridSpec g;
  for (const Point& b : points) {
    auto proj = geometry::closest_point(boundary, b);
    if (proj.distance > boundary.tolerance()) {
      throw Error(ErrorCode::AnchorOffBoundary, "grid point is not on the boundary");
    }
    g.arclengths.push_back(proj.arclength);
  }
  g.points = std::move(points);
  return g;
}

std::string to_string(Method method) {
  return method == Method::distance ? "distance" : "location";
}

Method parse_method(const std::string& name) {
  if (name == "distance") return Method::distance;
  if (name == "location") return Method::location;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

CurveResult estimate_curve(Method method, const SampleFrame& frame,
                           const geometry::Boundary& boundary, const GridSpec& grid, int p,
                           const CurveOptions& options) {
  (void)boundary;
  check_order(p);
  if (grid.size() == 0) throw Error(ErrorCode::InvalidGrid, "grid is empty");
  const auto h = bandwidths(grid, options);
  const auto fits = fit_all(method, frame, grid, p, h, options);
  CurveResult out = skeleton(method, grid, p, h, fits, options);
  attach_inference(out, fits, out.tau_hat, options);
  return out;
}

CurveResult estimate_curve_rbc(Method method, const SampleFrame& frame,
                               const geometry::Boundary& boundary, const GridSpec& grid, int p,
                               int q, const CurveOptions& options) {
  (void)boundary;
  check_order(p);
  if (q <= p) throw Error(ErrorCode::OrderNotGreater, "q must exceed p");
  if (grid.size() == 0) throw Error(ErrorCode::InvalidGrid, "grid is empty");
  const auto h = bandwidths(grid, options);
  const auto fits_p = fit_all(method, frame, grid, p, h, options);
  const auto fits_q = fit_all(method, frame, grid, q, h, options);
  CurveResult out = skeleton(method, grid, p, h, fits_p, options);
  out.q = q;
  for (std::size_t j = 0; j < fits_q.size(); ++j) {
    out.tau_rbc.push_back(fits_q[j].tau);
    if (out.valid[j] && !fits_q[j].ok) {
      out.valid[j] = false;
      ++out.n_missing;
      out.messages.push_back("grid point " + std::to_string(j) + " (order q): " +
                             fits_q[j].message);
    }
  }
  attach_inference(out, fits_q, out.tau_rbc, options);
  return out;
}

double sup_t_critical(const Eigen::MatrixXd& cov, double alpha, std::size_t n_draws,
                      std::uint64_t seed) {
  const Eigen::Index J = cov.rows();
  const double z = stats::normal_critical(alpha);
  if (J == 0 || n_draws == 0) return z;
  Eigen::VectorXd scale(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const double v = cov(j, j);
    scale(j) = v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
  }
  Eigen::MatrixXd corr = scale.asDiagonal() * cov * scale.asDiagonal();
  for (Eigen::Index j = 0; j < J; ++j) {
    if (scale(j) == 0.0) corr(j, j) = 1.0;  // degenerate point: treat as independent
  }
  corr = 0.5 * (corr + corr.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(1e-12).cwiseSqrt();
  Eigen::MatrixXd L = eig.eigenvectors() * root.asDiagonal();

  Engine engine = make_engine(seed, stream::band_draws, 0);
  std::normal_distribution<double> normal;
  std::vector<double> maxima(n_draws);
  Eigen::VectorXd g(J);
  for (std::size_t d = 0; d < n_draws; ++d) {
    for (Eigen::Index j = 0; j < J; ++j) g(j) = normal(engine);
    maxima[d] = (L * g).cwiseAbs().maxCoeff();
  }
  return std::max(z, stats::upper_quantile(std::move(maxima), 1.0 - alpha));
}

Band uniform_band(const CurveResult& curve, double alpha, std::size_t n_draws, std::uint64_t seed) {
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    if (curve.valid[j]) keep.push_back(Eigen::Index(j));
  }
  Eigen::MatrixXd sub(Eigen::Index(keep.size()), Eigen::Index(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = 0; b < keep.size(); ++b) {
      sub(Eigen::Index(a), Eigen::Index(b)) = curve.cov(keep[a], keep[b]);
    }
  }
  Band out;
  out.crit = sup_t_critical(sub, alpha, n_draws, seed);
  const auto& center = curve.center();
  out.intervals.assign(curve.size(), Interval{kNaN, kNaN});
  for (Eigen::Index j : keep) {
    const auto i = std::size_t(j);
    out.intervals[i] = {center[i] - out.crit * curve.se[i], center[i] + out.crit * curve.se[i]};
  }
  return out;
}

std::string to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::density:
      return "density";
    case WeightScheme::uniform:
      return "uniform";
    case WeightScheme::user:
      return "user";
  }
  return "uniform";
}

AggregateResult aggregate(const CurveResult& curve, const geometry::Boundary& boundary,
                          const WeightSpec& spec) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    if (curve.valid[j] && std::isfinite(curve.tau_hat[j])) idx.push_back(j);
  }
  if (idx.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "aggregation needs at least two valid grid points");
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return curve.arclengths[a] < curve.arclengths[b];
  });
  const std::size_t m = idx.size();
  const double total = boundary.length();
  const bool closed = boundary.closed();
  std::vector<double> s(m);
  for (std::size_t k = 0; k < m; ++k) s[k] = curve.arclengths[idx[k]];

  // Trapezoid nodal weights in arclength; closed curves wrap around.
  std::vector<double> omega(m, 0.0);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double gap = 0.5 * (s[k + 1] - s[k]);
    omega[k] += gap;
    omega[k + 1] += gap;
  }
  if (closed) {
    const double gap = 0.5 * (s[0] + total - s[m - 1]);
    omega[0] += gap;
    omega[m - 1] += gap;
  }

  std::vector<double> w(m, 1.0);
  if (spec.scheme == WeightScheme::user) {
    if (!spec.user) throw Error(ErrorCode::InvalidArgument, "user weights need a function");
    for (std::size_t k = 0; k < m; ++k) w[k] = spec.user(curve.points[idx[k]]);
  } else if (spec.scheme == WeightScheme::density) {
    if (!spec.frame) throw Error(ErrorCode::InvalidArgument, "density weights need the sample");
    double h = spec.h;
    if (!(h > 0.0)) {
      std::vector<double> hs = curve.h_per_point;
      std::nth_element(hs.begin(), hs.begin() + std::ptrdiff_t(hs.size() / 2), hs.end());
      h = hs[hs.size() / 2];
    }
    // Tubular slice counts: |D| <= h, nearest grid point in arclength.
    std::vector<double> count(m, 0.0);
    const SampleFrame& f = *spec.frame;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (std::abs(f.distance[i]) > h) continue;
      const double a = f.arclength[i];
      if (!closed && (a < s.front() || a > s.back())) continue;
      auto it = std::lower_bound(s.begin(), s.end(), a);
      std::size_t hi = std::size_t(it - s.begin());
      std::size_t best;
      if (hi == 0) {
        best = closed && (s[0] - a) > (a + total - s[m - 1]) ? m - 1 : 0;
      } else if (hi == m) {
        best = closed && (a - s[m - 1]) > (s[0] + total - a) ? 0 : m - 1;
      } else {
        best = (a - s[hi - 1]) <= (s[hi] - a) ? hi - 1 : hi;
      }
      count[best] += 1.0;
    }
    for (std::size_t k = 0; k < m; ++k) w[k] = omega[k] > 0.0 ? count[k] / omega[k] : 0.0;
  }
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
    }
  }

  double norm = 0.0;
  for (std::size_t k = 0; k < m; ++k) norm += omega[k] * w[k];
  if (!(norm > 0.0)) throw Error(ErrorCode::AllWeightsZero, "all aggregation weights are zero");

  AggregateResult out;
  out.weights_used = spec.scheme;
  out.skipped = curve.size() - m;
  out.weights.assign(curve.size(), kNaN);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(Eigen::Index(m));
  for (std::size_t k = 0; k < m; ++k) {
    a(Eigen::Index(k)) = omega[k] * w[k] / norm;
    out.weights[idx[k]] = w[k];
  }
  double est = 0.0, var = 0.0;
  std::optional<double> rbc;
  if (!curve.tau_rbc.empty()) rbc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    est += a(Eigen::Index(k)) * curve.tau_hat[idx[k]];
    if (rbc) *rbc += a(Eigen::Index(k)) * curve.tau_rbc[idx[k]];
    for (std::size_t l = 0; l < m; ++l) {
      var += a(Eigen::Index(k)) * a(Eigen::Index(l)) *
             curve.cov(Eigen::Index(idx[k]), Eigen::Index(idx[l]));
    }
  }
  out.wbate = est;
  out.wbate_rbc = rbc;
  out.wbate_se = std::sqrt(std::max(0.0, var));

  std::size_t arg = idx[0];
  for (std::size_t j : idx) {
    if (curve.tau_hat[j] > curve.tau_hat[arg]) arg = j;
  }
  out.lbate = curve.tau_hat[arg];
  out.lbate_point = curve.points[arg];
  out.lbate_arclength = curve.arclengths[arg];
  return out;
}

}  // namespace bdd::curve
