#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bdd/frame.hpp"
#include "bdd/regression.hpp"

namespace bdd::pooled {

/// One of the eight pooled local regressions, localised by |D_i| <= h.
///
///   1  Y ~ 1, T                                       [indicator weights]
///   2  Y ~ iota_L(S), T                               [indicator weights]
///   3  Y ~ iota_L(S), T, r_p(X)                       [indicator weights]
///   4  Y ~ 1, T, r_p(D)
///   5  Y ~ iota_L(S), T, r_p(D)
///   6  Y ~ iota_L(S), T, r_p(D), T r_p(D)
///   7  Y ~ iota_L(S), T, r_p(X), T r_p(X)
///   8  Y ~ T iota_L(S), iota_L(S), iota_L(S) (x) r_p(D), T iota_L(S) (x) r_p(D)
///
/// Specs 4-8 weight by kernel(D/h). Spec 8 reports one effect per segment.
struct PooledSpec {
  int id = 6;
  int p = 1;
  int segments = 1;
  regression::KernelKind kernel = regression::KernelKind::triangular;
  double h = 0.0;
  regression::Vce vce = regression::Vce::HC3;
};

/// Polynomial order actually used (0 for specs 1 and 2).
int effective_order(const PooledSpec& spec);
bool uses_indicator_weights(const PooledSpec& spec);
void validate(const PooledSpec& spec);

struct Design {
  Eigen::MatrixXd Z;
  Eigen::VectorXd Y;
  Eigen::VectorXd W;
  std::vector<int> treatment_columns;
  std::vector<std::string> column_names;
};

/// Throws EmptyWindow unless both sides have a positive-weight observation.
Design build_design(const PooledSpec& spec, const SampleFrame& frame);

struct EstimateResult {
  int spec_id = 0;
  std::vector<double> tau_hat;
  std::vector<double> se;
  std::vector<Interval> ci_conventional;
  /// Robust bias-corrected inference; empty unless produced by estimate_rbc.
  std::vector<double> tau_rbc;
  std::vector<double> se_rbc;
  std::vector<Interval> ci_rbc;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::size_t effective_n = 0;
  double h_used = 0.0;
  int p_used = 0;
  std::optional<int> q_used;
  double alpha = 0.05;
  regression::KernelKind kernel = regression::KernelKind::uniform;
  regression::Vce vce = regression::Vce::HC3;
  std::vector<std::string> dropped_columns;
};

/// Coefficient(s) on T (or T iota_L for spec 8) with conventional intervals
/// tau +/- z_{1-alpha/2} se.
EstimateResult estimate(const PooledSpec& spec, const SampleFrame& frame, double alpha = 0.05);

/// The specification refitted at order q for robust bias correction: the same
/// spec for ids 4-8, spec 6 for ids 1-2, spec 7 for id 3 (indicator weights
/// are kept for 1-3).
PooledSpec rbc_companion(const PooledSpec& spec, int q);

/// Point estimate from the order-p fit; ci_rbc centred on, and scaled by, the
/// order-q fit at the same h. Throws OrderNotGreater unless q > p.
EstimateResult estimate_rbc(const PooledSpec& spec, const SampleFrame& frame, int q,
                            double alpha = 0.05);

enum class BinScheme { evenly_spaced, quantile };
BinScheme parse_bin_scheme(const std::string& name);

struct RdBin {
  int side = 0;  // 0 control (D < 0), 1 treated (D >= 0)
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  double mean_y = 0.0;  // NaN for empty bins
  std::size_t count = 0;
};

/// Binned outcome means against D. With h the sides span [-h, 0) and [0, h];
/// otherwise the observed support.
std::vector<RdBin> rd_plot_bins(const SampleFrame& frame, int bins_per_side, BinScheme scheme,
                                std::optional<double> h = std::nullopt);

}  // namespace bdd::pooled
