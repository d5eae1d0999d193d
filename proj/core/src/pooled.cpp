#include "bdd/pooled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdd/stats.hpp"

namespace bdd::pooled {

using regression::KernelKind;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool has_segment_effects(int id) { return id != 1 && id != 4; }
bool uses_score_basis(int id) { return id == 3 || id == 7; }

std::string power_name(const std::string& var, int k) {
  return k == 1 ? var : var + "^" + std::to_string(k);
}

std::vector<std::string> biv_names(int p) {
  std::vector<std::string> out;
  for (auto [a, b] : regression::basis_biv_exponents(p)) {
    std::string s;
    if (a > 0) s += power_name("x1", a);
    if (b > 0) s += (s.empty() ? "" : "*") + power_name("x2", b);
    out.push_back(s);
  }
  return out;
}

}  // namespace

int effective_order(const PooledSpec& spec) {
  return (spec.id == 1 || spec.id == 2) ? 0 : spec.p;
}

bool uses_indicator_weights(const PooledSpec& spec) { return spec.id >= 1 && spec.id <= 3; }

void validate(const PooledSpec& spec) {
  if (spec.id < 1 || spec.id > 8) {
    throw Error(ErrorCode::InvalidArgument, "pooled spec id must be in 1..8");
  }
  if (spec.p < 0) throw Error(ErrorCode::InvalidArgument, "polynomial order must be >= 0");
  if (spec.segments < 1) throw Error(ErrorCode::InvalidArgument, "segment count must be >= 1");
  if (!(spec.h > 0.0) || !std::isfinite(spec.h)) {
    throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive");
  }
}

Design build_design(const PooledSpec& spec, const SampleFrame& frame) {
  validate(spec);
  const std::size_t n = frame.size();
  const int p = effective_order(spec);
  const int L = spec.segments;
  for (int s : frame.segment) {
    if (s < 1 || s > L) {
      throw Error(ErrorCode::InvalidArgument, "segment index outside 1..L for the requested L");
    }
  }

  Design d;
  d.Y = Eigen::Map<const Eigen::VectorXd>(frame.y.data(), Eigen::Index(n));
  d.W.resize(Eigen::Index(n));
  const KernelKind kernel = uses_indicator_weights(spec) ? KernelKind::uniform : spec.kernel;
  std::size_t treated = 0, control = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = regression::kernel_weight(kernel, frame.distance[i], spec.h);
    d.W(Eigen::Index(i)) = w;
    if (w > 0.0) (frame.treated[i] ? treated : control)++;
  }
  if (treated == 0 || control == 0) {
    throw Error(ErrorCode::EmptyWindow, "no observations within the bandwidth on " +
                                            std::string(treated == 0 ? "the treated" : "the control") +
                                            " side");
  }

  // Column layout.
  auto& names = d.column_names;
  const int qb = uses_score_basis(spec.id) ? regression::basis_biv_size(p) : p;
  std::vector<std::string> basis_names;
  if (uses_score_basis(spec.id)) {
    basis_names = biv_names(p);
  } else {
    for (int k = 1; k <= p; ++k) basis_names.push_back(power_name("D", k));
  }
  auto seg_name = [](int l) { return "S=" + std::to_string(l); };

  if (spec.id == 8) {
    for (int l = 1; l <= L; ++l) {
      d.treatment_columns.push_back(int(names.size()));
      names.push_back("T*" + seg_name(l));
    }
    for (int l = 1; l <= L; ++l) names.push_back(seg_name(l));
    for (int l = 1; l <= L; ++l)
      for (const auto& b : basis_names) names.push_back(seg_name(l) + "*" + b);
    for (int l = 1; l <= L; ++l)
      for (const auto& b : basis_names) names.push_back("T*" + seg_name(l) + "*" + b);
  } else {
    if (has_segment_effects(spec.id)) {
      for (int l = 1; l <= L; ++l) names.push_back(seg_name(l));
    } else {
      names.push_back("1");
    }
    d.treatment_columns.push_back(int(names.size()));
    names.push_back("T");
    if (spec.id >= 3) {
      for (const auto& b : basis_names) names.push_back(b);
    }
    if (spec.id == 6 || spec.id == 7) {
      for (const auto& b : basis_names) names.push_back("T*" + b);
    }
  }

  const Eigen::Index k = Eigen::Index(names.size());
  d.Z = Eigen::MatrixXd::Zero(Eigen::Index(n), k);
  std::vector<double> basis;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index r = Eigen::Index(i);
    const double t = frame.treated[i] ? 1.0 : 0.0;
    const int s = frame.segment[i];
    if (uses_score_basis(spec.id)) {
      basis = regression::basis_biv(frame.x[i], p);
    } else {
      basis = regression::basis_uni(frame.distance[i], p);
    }
    Eigen::Index c = 0;
    if (spec.id == 8) {
      d.Z(r, s - 1) = t;
      c = L;
      d.Z(r, c + s - 1) = 1.0;
      c += L;
      for (int j = 0; j < qb; ++j) d.Z(r, c + (s - 1) * qb + j) = basis[std::size_t(j)];
      c += L * qb;
      for (int j = 0; j < qb; ++j) d.Z(r, c + (s - 1) * qb + j) = t * basis[std::size_t(j)];
      continue;
    }
    if (has_segment_effects(spec.id)) {
      d.Z(r, s - 1) = 1.0;
      c = L;
    } else {
      d.Z(r, 0) = 1.0;
      c = 1;
    }
    d.Z(r, c++) = t;
    if (spec.id >= 3) {
      for (int j = 0; j < qb; ++j) d.Z(r, c++) = basis[std::size_t(j)];
    }
    if (spec.id == 6 || spec.id == 7) {
      for (int j = 0; j < qb; ++j) d.Z(r, c++) = t * basis[std::size_t(j)];
    }
  }
  return d;
}

EstimateResult estimate(const PooledSpec& spec, const SampleFrame& frame, double alpha) {
  Design design = build_design(spec, frame);
  regression::WlsOptions opts;
  opts.vce = spec.vce;
  auto fit = regression::wls(design.Z, design.Y, design.W, opts);

  EstimateResult res;
  res.spec_id = spec.id;
  res.h_used = spec.h;
  res.p_used = effective_order(spec);
  res.alpha = alpha;
  res.kernel = uses_indicator_weights(spec) ? KernelKind::uniform : spec.kernel;
  res.vce = spec.vce;
  res.effective_n = fit.effective_n;
  for (std::size_t row : fit.rows) (frame.treated[row] ? res.n_treated : res.n_control)++;
  for (int c : fit.dropped_columns) res.dropped_columns.push_back(design.column_names[std::size_t(c)]);

  const double z = stats::normal_critical(alpha);
  bool any_identified = false;
  for (int c : design.treatment_columns) {
    double tau = kNaN, se = kNaN;
    if (fit.retained(c)) {
      tau = fit.coefficients(c);
      se = std::sqrt(std::max(0.0, fit.covariance(c, c)));
      any_identified = true;
    }
    res.tau_hat.push_back(tau);
    res.se.push_back(se);
    res.ci_conventional.push_back({tau - z * se, tau + z * se});
  }
  if (!any_identified) {
    throw Error(ErrorCode::DegenerateDesign, "treatment coefficient is not identified");
  }
  return res;
}

PooledSpec rbc_companion(const PooledSpec& spec, int q) {
  PooledSpec out = spec;
  out.p = q;
  if (spec.id == 1 || spec.id == 2) out.id = 6;
  if (spec.id == 3) out.id = 7;
  if (uses_indicator_weights(spec)) out.kernel = KernelKind::uniform;
  if (spec.id == 1) out.segments = 1;
  return out;
}

EstimateResult estimate_rbc(const PooledSpec& spec, const SampleFrame& frame, int q,
                            double alpha) {
  const int p = effective_order(spec);
  if (q <= p) {
    throw Error(ErrorCode::OrderNotGreater, "bias-correction order q must exceed p");
  }
  EstimateResult res = estimate(spec, frame, alpha);
  PooledSpec companion = rbc_companion(spec, q);
  if (spec.id == 1) {
    // Spec 1 has no segment effects; its companion runs with a single intercept.
    SampleFrame single = frame;
    std::fill(single.segment.begin(), single.segment.end(), 1);
    single.segments = 1;
    EstimateResult hi = estimate(companion, single, alpha);
    res.tau_rbc = hi.tau_hat;
    res.se_rbc = hi.se;
    res.ci_rbc = hi.ci_conventional;
  } else {
    EstimateResult hi = estimate(companion, frame, alpha);
    res.tau_rbc = hi.tau_hat;
    res.se_rbc = hi.se;
    res.ci_rbc = hi.ci_conventional;
  }
  res.q_used = q;
  return res;
}

BinScheme parse_bin_scheme(const std::string& name) {
  if (name == "es" || name == "evenly-spaced" || name == "evenly_spaced") {
    return BinScheme::evenly_spaced;
  }
  if (name == "qs" || name == "quantile") return BinScheme::quantile;
  throw Error(ErrorCode::InvalidArgument, "unknown binning scheme '" + name + "'");
}

std::vector<RdBin> rd_plot_bins(const SampleFrame& frame, int bins_per_side, BinScheme scheme,
                                std::optional<double> h) {
  if (bins_per_side < 1) throw Error(ErrorCode::InvalidArgument, "need at least one bin per side");
  if (h && !(*h > 0.0)) throw Error(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive");

  std::vector<RdBin> out;
  for (int side = 0; side <= 1; ++side) {
    // Observations on this side inside the plotting range.
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < frame.size(); ++i) {
      double d = frame.distance[i];
      bool on_side = side == 1 ? d >= 0.0 : d < 0.0;
      if (!on_side) continue;
      if (h && std::abs(d) > *h) continue;
      idx.push_back(i);
    }
    double lo, hi;
    if (h) {
      lo = side == 1 ? 0.0 : -*h;
      hi = side == 1 ? *h : 0.0;
    } else {
      lo = 0.0;
      hi = 0.0;
      for (std::size_t i : idx) {
        lo = std::min(lo, frame.distance[i]);
        hi = std::max(hi, frame.distance[i]);
      }
    }

    std::vector<RdBin> bins(static_cast<std::size_t>(bins_per_side));
    std::vector<stats::CompensatedSum> sums(bins.size());
    if (scheme == BinScheme::evenly_spaced) {
      const double width = (hi - lo) / bins_per_side;
      for (int b = 0; b < bins_per_side; ++b) {
        auto& bin = bins[std::size_t(b)];
        bin.side = side;
        bin.lo = lo + b * width;
        bin.hi = b + 1 == bins_per_side ? hi : lo + (b + 1) * width;
        bin.center = 0.5 * (bin.lo + bin.hi);
      }
      for (std::size_t i : idx) {
        int b = width > 0.0 ? int(std::floor((frame.distance[i] - lo) / width)) : 0;
        b = std::clamp(b, 0, bins_per_side - 1);
        bins[std::size_t(b)].count++;
        sums[std::size_t(b)].add(frame.y[i]);
      }
    } else {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return frame.distance[a] < frame.distance[b];
      });
      const std::size_t m = idx.size();
      for (int b = 0; b < bins_per_side; ++b) {
        auto& bin = bins[std::size_t(b)];
        bin.side = side;
        std::size_t from = m * std::size_t(b) / std::size_t(bins_per_side);
        std::size_t to = m * std::size_t(b + 1) / std::size_t(bins_per_side);
        for (std::size_t r = from; r < to; ++r) {
          bin.count++;
          sums[std::size_t(b)].add(frame.y[idx[r]]);
        }
        if (to > from) {
          bin.lo = frame.distance[idx[from]];
          bin.hi = frame.distance[idx[to - 1]];
        } else {
          bin.lo = bin.hi = b == 0 ? lo : bins[std::size_t(b) - 1].hi;
        }
        bin.center = 0.5 * (bin.lo + bin.hi);
      }
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
      bins[b].mean_y = bins[b].count ? sums[b].value() / double(bins[b].count) : kNaN;
      out.push_back(bins[b]);
    }
  }
  return out;
}

}  // namespace bdd::pooled
