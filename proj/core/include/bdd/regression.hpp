#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bdd/common.hpp"

namespace bdd::regression {

/// (d, d^2, ..., d^p); empty for p = 0.
std::vector<double> basis_uni(double d, int p);

/// Bivariate polynomial terms of degree 1..p without constant, graded
/// lexicographic: u1, u2, u1^2, u1 u2, u2^2, ..., u1^p, ..., u2^p.
std::vector<double> basis_biv(Point u, int p);

constexpr int basis_biv_size(int p) { return p * (p + 3) / 2; }

/// Exponent pairs (a, b) of each basis_biv term, in the same order.
std::vector<std::pair<int, int>> basis_biv_exponents(int p);

enum class KernelKind { uniform, triangular, epanechnikov };

/// Kernel profile k(u) for u = |t|/h >= 0; zero for u > 1.
double kernel_profile(KernelKind kind, double u);

/// Univariate weight k(|t|/h). Throws NonpositiveBandwidth unless h > 0.
double kernel_weight(KernelKind kind, double t, double h);

/// Radial bivariate weight k(||t||/h).
double kernel_weight(KernelKind kind, Point t, double h);

std::string to_string(KernelKind kind);
KernelKind parse_kernel(const std::string& name);

enum class Vce { HC0, HC1, HC3 };

std::string to_string(Vce vce);
Vce parse_vce(const std::string& name);

/// Weighted least squares fit with heteroskedasticity-robust covariance.
///
/// Full-length vectors index the columns of the design passed to wls();
/// dropped columns carry a zero coefficient and zero covariance rows.
struct WlsFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  /// (Z' W Z)^{-1} on retained columns, zero elsewhere.
  Eigen::MatrixXd bread;
  std::size_t effective_n = 0;
  std::vector<int> dropped_columns;
  /// Rows with positive weight, in input order.
  std::vector<std::size_t> rows;
  /// Per-row residual and leverage, aligned with `rows`.
  Eigen::VectorXd residuals;
  Eigen::VectorXd leverage;
  /// Per-row sandwich score w_i * e_i * a_i, where a_i is the HC adjustment.
  /// The meat matrix is sum_i score_i^2 z_i z_i'.
  Eigen::VectorXd scores;

  bool retained(int column) const;
  int retained_count() const { return int(coefficients.size()) - int(dropped_columns.size()); }
};

struct WlsOptions {
  Vce vce = Vce::HC3;
  /// Columns whose residual norm, after projecting out earlier retained
  /// columns, falls below tol (on unit-normalised columns) are dropped.
  double collinearity_tol = 1e-10;
};

/// Minimises sum_i W_i (Y_i - Z_i' b)^2. Throws DegenerateDesign when no weight
/// is positive or no column survives.
WlsFit wls(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const Eigen::VectorXd& W,
           const WlsOptions& options = {});

/// Influence of each positive-weight row on coefficient `column`, aligned
/// with fit.rows: psi_i = (bread z_i)_column * score_i. Their squares sum to
/// covariance(column, column).
Eigen::VectorXd influence(const WlsFit& fit, const Eigen::MatrixXd& Z, int column);

}  // namespace bdd::regression
