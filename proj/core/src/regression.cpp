#include "bdd/regression.hpp"

#include <algorithm>
#include <cmath>

namespace bdd::regression {

std::vector<double> basis_uni(double d, int p) {
  std::vector<double> out;
  out.reserve(std::size_t(std::max(p, 0)));
  double v = 1.0;
  for (int k = 1; k <= p; ++k) {
    v *= d;
    out.push_back(v);
  }
  return out;
}

std::vector<std::pair<int, int>> basis_biv_exponents(int p) {
  std::vector<std::pair<int, int>> out;
  for (int g = 1; g <= p; ++g) {
    for (int b = 0; b <= g; ++b) out.emplace_back(g - b, b);
  }
  return out;
}

std::vector<double> basis_biv(Point u, int p) {
  std::vector<double> out;
  out.reserve(std::size_t(basis_biv_size(std::max(p, 0))));
  // Powers of each coordinate, reused across degrees.
  std::vector<double> p1(std::size_t(std::max(p, 0)) + 1, 1.0), p2 = p1;
  for (int k = 1; k <= p; ++k) {
    p1[std::size_t(k)] = p1[std::size_t(k) - 1] * u.x1;
    p2[std::size_t(k)] = p2[std::size_t(k) - 1] * u.x2;
  }
  for (int g = 1; g <= p; ++g) {
    for (int b = 0; b <= g; ++b) out.push_back(p1[std::size_t(g - b)] * p2[std::size_t(b)]);
  }
  return out;
}

double kernel_profile(KernelKind kind, double u) {
  u = std::abs(u);
  if (u > 1.0) return 0.0;
  switch (kind) {
    case KernelKind::uniform: return 1.0;
    case KernelKind::triangular: return 1.0 - u;
    case KernelKind::epanechnikov: return 0.75 * (1.0 - u * u);
  }
  return 0.0;
}

double kernel_weight(KernelKind kind, double t, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive");
  return kernel_profile(kind, std::abs(t) / h);
}

double kernel_weight(KernelKind kind, Point t, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive");
  return kernel_profile(kind, norm(t) / h);
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::uniform: return "uniform";
    case KernelKind::triangular: return "triangular";
    case KernelKind::epanechnikov: return "epanechnikov";
  }
  return "unknown";
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "uniform") return KernelKind::uniform;
  if (name == "triangular") return KernelKind::triangular;
  if (name == "epanechnikov") return KernelKind::epanechnikov;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + name + "'");
}

std::string to_string(Vce vce) {
  switch (vce) {
    case Vce::HC0: return "HC0";
    case Vce::HC1: return "HC1";
    case Vce::HC3: return "HC3";
  }
  return "unknown";
}

Vce parse_vce(const std::string& name) {
  if (name == "HC0" || name == "hc0") return Vce::HC0;
  if (name == "HC1" || name == "hc1") return Vce::HC1;
  if (name == "HC3" || name == "hc3") return Vce::HC3;
  throw Error(ErrorCode::InvalidArgument, "unknown variance estimator '" + name + "'");
}

bool WlsFit::retained(int column) const {
  return std::find(dropped_columns.begin(), dropped_columns.end(), column) ==
         dropped_columns.end();
}

WlsFit wls(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const Eigen::VectorXd& W,
           const WlsOptions& options) {
  const Eigen::Index n = Z.rows(), k = Z.cols();
  if (Y.size() != n || W.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "design, outcome and weight lengths differ");
  }
  WlsFit fit;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(W(i) >= 0.0) || !std::isfinite(W(i))) {
      throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
    }
    if (W(i) > 0.0) fit.rows.push_back(std::size_t(i));
  }
  const Eigen::Index m = Eigen::Index(fit.rows.size());
  fit.effective_n = fit.rows.size();
  if (m == 0) throw Error(ErrorCode::DegenerateDesign, "no observation has positive weight");

  Eigen::MatrixXd A(m, k);
  Eigen::VectorXd b(m), sqw(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    Eigen::Index i = Eigen::Index(fit.rows[std::size_t(r)]);
    sqw(r) = std::sqrt(W(i));
    A.row(r) = sqw(r) * Z.row(i);
    b(r) = sqw(r) * Y(i);
  }

  // Unit-normalise columns, then run an unpivoted Householder sweep in column
  // order, skipping columns that are numerically spanned by earlier ones.
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  std::vector<int> kept;
  {
    Eigen::MatrixXd M = A;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (scale(j) > 0.0) M.col(j) /= scale(j);
    }
    Eigen::Index rank = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!(scale(j) > 0.0) || rank >= m) {
        fit.dropped_columns.push_back(int(j));
        continue;
      }
      Eigen::VectorXd x = M.col(j).tail(m - rank);
      double xnorm = x.norm();
      if (!(xnorm > options.collinearity_tol)) {
        fit.dropped_columns.push_back(int(j));
        continue;
      }
      // Reflect x onto -sign(x0) ||x|| e1 and apply to the remaining columns.
      Eigen::VectorXd v = x;
      v(0) += (x(0) >= 0.0 ? 1.0 : -1.0) * xnorm;
      double vv = v.squaredNorm();
      auto block = M.bottomRightCorner(m - rank, k - j);
      Eigen::RowVectorXd proj = (v.transpose() * block) * (2.0 / vv);
      block.noalias() -= v * proj;
      kept.push_back(int(j));
      ++rank;
    }
  }
  if (kept.empty()) throw Error(ErrorCode::DegenerateDesign, "no design column survives");

  const Eigen::Index r = Eigen::Index(kept.size());
  Eigen::MatrixXd As(m, r);
  Eigen::VectorXd s(r);
  for (Eigen::Index c = 0; c < r; ++c) {
    s(c) = scale(kept[std::size_t(c)]);
    As.col(c) = A.col(kept[std::size_t(c)]) / s(c);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(As);
  Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(r, r));
  Eigen::VectorXd beta_s = qr.solve(b);
  Eigen::MatrixXd bread_s = Rinv * Rinv.transpose();

  // Residuals, leverages, scores.
  Eigen::VectorXd fitted_w = As * beta_s;  // sqrt(w) * fitted
  Eigen::MatrixXd Qrows = As * Rinv;       // rows of the thin Q factor
  fit.residuals.resize(m);
  fit.leverage.resize(m);
  fit.scores.resize(m);
  const double n_eff = double(m);
  const double hc1 = (options.vce == Vce::HC1 && n_eff > double(r))
                         ? std::sqrt(n_eff / (n_eff - double(r)))
                         : 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double e = (b(i) - fitted_w(i)) / sqw(i);
    double lev = Qrows.row(i).squaredNorm();
    double adj = 1.0;
    if (options.vce == Vce::HC1) adj = hc1;
    if (options.vce == Vce::HC3) adj = 1.0 / std::max(1.0 - lev, 1e-8);
    fit.residuals(i) = e;
    fit.leverage(i) = lev;
    fit.scores(i) = sqw(i) * sqw(i) * e * adj;
  }

  // Meat on scaled columns: sum_i score_i^2 ztilde_i ztilde_i', where
  // ztilde_i = (sqrt(w_i) z_i / s) / sqrt(w_i).
  Eigen::MatrixXd G(m, r);
  for (Eigen::Index i = 0; i < m; ++i) G.row(i) = As.row(i) * (fit.scores(i) / sqw(i));
  Eigen::MatrixXd meat_s = G.transpose() * G;
  Eigen::MatrixXd cov_s = bread_s * meat_s * bread_s;

  fit.coefficients = Eigen::VectorXd::Zero(k);
  fit.covariance = Eigen::MatrixXd::Zero(k, k);
  fit.bread = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < r; ++a) {
    Eigen::Index ja = kept[std::size_t(a)];
    fit.coefficients(ja) = beta_s(a) / s(a);
    for (Eigen::Index c = 0; c < r; ++c) {
      Eigen::Index jc = kept[std::size_t(c)];
      fit.covariance(ja, jc) = cov_s(a, c) / (s(a) * s(c));
      fit.bread(ja, jc) = bread_s(a, c) / (s(a) * s(c));
    }
  }
  // Symmetrise away rounding.
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  return fit;
}

Eigen::VectorXd influence(const WlsFit& fit, const Eigen::MatrixXd& Z, int column) {
  const Eigen::Index m = Eigen::Index(fit.rows.size());
  Eigen::VectorXd out(m);
  Eigen::RowVectorXd brow = fit.bread.row(column);
  for (Eigen::Index r = 0; r < m; ++r) {
    out(r) = brow.dot(Z.row(Eigen::Index(fit.rows[std::size_t(r)]))) * fit.scores(r);
  }
  return out;
}

}  // namespace bdd::regression
