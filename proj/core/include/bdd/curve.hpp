#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bdd/frame.hpp"
#include "bdd/geometry.hpp"
#include "bdd/regression.hpp"

namespace bdd::curve {

/// Evaluation points on the boundary with their arclength positions.
struct GridSpec {
  std::vector<Point> points;
  std::vector<double> arclengths;

  std::size_t size() const { return points.size(); }

  /// J evenly spaced points (J >= 2).
  static GridSpec on(const geometry::Boundary& boundary, int points);
  /// Arbitrary points, each of which must lie on the boundary.
  static GridSpec at(const geometry::Boundary& boundary, std::vector<Point> points);
};

/// distance: Y ~ 1, T, r_p(D(b)), T r_p(D(b)) with D(b) = +-||X - b||.
/// location: Y ~ 1, T, r_p(X - b), T r_p(X - b).
/// Both weight by k(||X - b|| / h).
enum class Method { distance, location };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct CurveOptions {
  regression::KernelKind kernel = regression::KernelKind::triangular;
  regression::Vce vce = regression::Vce::HC3;
  /// Global bandwidth; h_per_point, when non-empty, overrides it point by point.
  double h = 0.0;
  std::vector<double> h_per_point;
  double alpha = 0.05;
  std::size_t n_draws = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct CurveResult {
  Method method = Method::location;
  std::vector<Point> points;
  std::vector<double> arclengths;
  /// Order-p estimates; NaN where the point could not be estimated.
  std::vector<double> tau_hat;
  /// Order-q estimates; empty unless produced by estimate_curve_rbc.
  std::vector<double> tau_rbc;
  std::vector<bool> valid;
  /// Joint covariance of the estimates that inference is based on (the
  /// order-q fit for RBC curves). Rows and columns of invalid points are NaN.
  Eigen::MatrixXd cov;
  std::vector<double> se;
  std::vector<Interval> ci_pointwise;
  std::vector<Interval> band;
  double crit = 0.0;
  std::vector<double> h_per_point;
  std::vector<std::size_t> effective_n;
  int p = 1;
  std::optional<int> q;
  double alpha = 0.05;
  regression::KernelKind kernel = regression::KernelKind::triangular;
  regression::Vce vce = regression::Vce::HC3;
  std::uint64_t seed = 0;
  std::size_t n_draws = 0;
  std::size_t n_missing = 0;
  std::vector<std::string> messages;

  std::size_t size() const { return points.size(); }
  /// Estimates that intervals are centred on.
  const std::vector<double>& center() const { return q ? tau_rbc : tau_hat; }
};

CurveResult estimate_curve(Method method, const SampleFrame& frame,
                           const geometry::Boundary& boundary, const GridSpec& grid, int p,
                           const CurveOptions& options);

inline CurveResult estimate_distance(const SampleFrame& frame, const geometry::Boundary& boundary,
                                     const GridSpec& grid, int p, const CurveOptions& options) {
  return estimate_curve(Method::distance, frame, boundary, grid, p, options);
}

inline CurveResult estimate_location(const SampleFrame& frame, const geometry::Boundary& boundary,
                                     const GridSpec& grid, int p, const CurveOptions& options) {
  return estimate_curve(Method::location, frame, boundary, grid, p, options);
}

/// tau_hat from the order-p fit; tau_rbc, cov, intervals and band from the
/// order-q fit at the same bandwidths. Throws OrderNotGreater unless q > p.
CurveResult estimate_curve_rbc(Method method, const SampleFrame& frame,
                               const geometry::Boundary& boundary, const GridSpec& grid, int p,
                               int q, const CurveOptions& options);

/// (1 - alpha) quantile of max_j |G_j|, G ~ N(0, corr(cov)), from n_draws
/// seeded draws; never below the pointwise critical value.
double sup_t_critical(const Eigen::MatrixXd& cov, double alpha, std::size_t n_draws,
                      std::uint64_t seed);

struct Band {
  double crit = 0.0;
  std::vector<Interval> intervals;
};

/// Sup-t band over the valid points; invalid points get NaN intervals.
Band uniform_band(const CurveResult& curve, double alpha, std::size_t n_draws, std::uint64_t seed);

enum class WeightScheme { density, uniform, user };

std::string to_string(WeightScheme scheme);

struct WeightSpec {
  WeightScheme scheme = WeightScheme::uniform;
  std::function<double(Point)> user;
  /// Required for density weights.
  const SampleFrame* frame = nullptr;
  /// Tube half-width for density weights; 0 uses the curve's median bandwidth.
  double h = 0.0;
};

struct AggregateResult {
  double wbate = 0.0;
  double wbate_se = 0.0;
  /// Same weights applied to tau_rbc, when the curve has one.
  std::optional<double> wbate_rbc;
  double lbate = 0.0;
  Point lbate_point;
  double lbate_arclength = 0.0;
  WeightScheme weights_used = WeightScheme::uniform;
  std::vector<double> weights;
  std::size_t skipped = 0;
};

/// Trapezoidal arclength average of tau_hat over the valid grid points, and
/// its maximum. Throws InsufficientData with fewer than two valid points and
/// AllWeightsZero when the weights vanish.
AggregateResult aggregate(const CurveResult& curve, const geometry::Boundary& boundary,
                          const WeightSpec& weights);

}  // namespace bdd::curve
