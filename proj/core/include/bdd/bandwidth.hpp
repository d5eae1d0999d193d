#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "bdd/frame.hpp"
#include "bdd/geometry.hpp"
#include "bdd/regression.hpp"

namespace bdd::bandwidth {

/// MSE-optimal bandwidth for the proxy B^2 h^{2(p+1)} + V / (n h^dim).
struct BandwidthResult {
  double h = 0.0;
  double bias_constant = 0.0;
  double variance_constant = 0.0;
  double exponent = 0.0;
  int pilot_order = 0;
  /// Rule-of-thumb used because the pilot could not be fitted.
  bool fallback = false;
  std::vector<std::string> warnings;
};

struct PilotOptions {
  std::size_t min_pilot = 50;
  /// Share of observations nearest to a boundary point used by the
  /// bivariate pilot.
  double neighborhood_fraction = 0.5;
  /// Interior boundary angles below this (radians) trigger a regularity warning.
  double angle_threshold = std::numbers::pi / 2.0;
};

/// argmin_h B^2 h^{2(p+1)} + V / (n h^dim), for dim = 1 (univariate) or 2.
double plug_in_h(double bias_constant, double variance_constant, std::size_t n, int p, int dim);

/// One-sided equivalent-kernel constants of an order-p local polynomial at a
/// boundary: intercept bias per unit (p+1)-th Taylor coefficient, and the
/// intercept variance factor e0' G^-1 L G^-1 e0.
struct KernelConstants {
  double bias = 0.0;
  double variance = 0.0;
};
KernelConstants univariate_constants(regression::KernelKind kernel, int p);

/// Largest pairwise distance between observed scores (falls back to the range
/// of D when all scores coincide, e.g. for frames built from D alone).
double score_diameter(const SampleFrame& frame);

/// Pooled selector in the distance score D (exponent 1/(2p+3)).
BandwidthResult h_mse_pooled(const SampleFrame& frame, int p, regression::KernelKind kernel,
                             const PilotOptions& options = {});

/// Bias and variance constants of the location-based estimator at one point.
struct PointConstants {
  double bias = 0.0;
  double variance = 0.0;
  bool ok = false;
};
PointConstants location_constants(const SampleFrame& frame, const geometry::Boundary& boundary,
                                  Point b, int p, regression::KernelKind kernel,
                                  const PilotOptions& options = {});

/// Location-based selector at a boundary point (exponent 1/(2p+4)).
BandwidthResult h_mse_location(const SampleFrame& frame, const geometry::Boundary& boundary,
                               Point b, int p, regression::KernelKind kernel,
                               const PilotOptions& options = {});

/// Single bandwidth minimising the summed per-point MSE proxies over a grid.
BandwidthResult h_mse_integrated(const SampleFrame& frame, const geometry::Boundary& boundary,
                                 const std::vector<Point>& grid, int p,
                                 regression::KernelKind kernel, const PilotOptions& options = {});

/// Warnings for interior angles sharper than the threshold.
std::vector<std::string> regularity_warnings(const geometry::Boundary& boundary,
                                             double angle_threshold);

}  // namespace bdd::bandwidth
