#include "bdd/monte_carlo.hpp"

#include <cmath>

#include "bdd/bandwidth.hpp"
#include "bdd/frame.hpp"
#include "bdd/parallel.hpp"
#include "bdd/pooled.hpp"
#include "bdd/rng.hpp"

namespace bdd::mc {

namespace {

/// Interval membership with a rounding-level slack, so zero-width intervals
/// from noiseless designs still cover an exactly estimated truth.
bool covers(Interval ci, double v) {
  const double slack = 1e-12 * (1.0 + std::abs(v));
  return ci.lo - slack <= v && v <= ci.hi + slack;
}

struct RepOutcome {
  bool ok = false;
  std::string message;
  std::vector<double> error;        // estimate - truth per target
  std::vector<bool> covered;        // conventional (pooled) or pointwise (curve)
  std::vector<bool> covered_rbc;    // pooled only
  bool band_all = false;
  double h = 0.0;
};

RepOutcome run_pooled(const SampleFrame& frame, const sim::Truth& truth,
                      const EstimatorConfig& cfg) {
  RepOutcome out;
  pooled::PooledSpec spec{cfg.spec, cfg.p, cfg.segments, cfg.kernel, cfg.h, cfg.vce};
  if (spec.h <= 0.0) {
    const int order = pooled::uses_indicator_weights(spec) ? std::max(cfg.p, 1) : cfg.p;
    spec.h = bandwidth::h_mse_pooled(frame, order, cfg.kernel).h;
  }
  out.h = spec.h;
  auto est = cfg.q ? pooled::estimate_rbc(spec, frame, *cfg.q, cfg.alpha)
                   : pooled::estimate(spec, frame, cfg.alpha);
  const std::vector<double> target =
      cfg.spec == 8 ? truth.segment_bate : std::vector<double>{truth.bate};
  for (std::size_t k = 0; k < est.tau_hat.size(); ++k) {
    if (!std::isfinite(est.tau_hat[k])) {
      out.message = "coefficient not identified";
      return out;
    }
    out.error.push_back(est.tau_hat[k] - target[k]);
    out.covered.push_back(covers(est.ci_conventional[k], target[k]));
    if (cfg.q) out.covered_rbc.push_back(covers(est.ci_rbc[k], target[k]));
  }
  out.ok = true;
  return out;
}

RepOutcome run_curve(const SampleFrame& frame, const geometry::Boundary& boundary,
                     const sim::DgpSpec& dgp, const EstimatorConfig& cfg, std::uint64_t seed) {
  RepOutcome out;
  auto grid = curve::GridSpec::on(boundary, cfg.grid);
  curve::CurveOptions opt;
  opt.kernel = cfg.kernel;
  opt.vce = cfg.vce;
  opt.alpha = cfg.alpha;
  opt.n_draws = cfg.n_draws;
  opt.seed = seed;
  opt.threads = 1;
  opt.h = cfg.h;
  if (opt.h <= 0.0) {
    opt.h = bandwidth::h_mse_integrated(frame, boundary, grid.points, cfg.p, cfg.kernel).h;
  }
  out.h = opt.h;
  auto res = cfg.q ? curve::estimate_curve_rbc(cfg.method, frame, boundary, grid, cfg.p, *cfg.q, opt)
                   : curve::estimate_curve(cfg.method, frame, boundary, grid, cfg.p, opt);
  if (res.n_missing > 0) {
    out.message = std::to_string(res.n_missing) + " grid point(s) not estimable";
    return out;
  }
  out.band_all = true;
  for (std::size_t j = 0; j < res.size(); ++j) {
    const double tau = dgp.tau(res.points[j]);
    out.error.push_back(res.tau_hat[j] - tau);
    out.covered.push_back(covers(res.ci_pointwise[j], tau));
    out.band_all = out.band_all && covers(res.band[j], tau);
  }
  out.ok = true;
  return out;
}

}  // namespace

McReport run(const sim::DgpSpec& dgp, const EstimatorConfig& config, std::size_t n_reps,
             std::uint64_t seed, unsigned threads) {
  if (n_reps < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replication");
  const geometry::Boundary boundary = sim::make_boundary(dgp);
  const auto partition = geometry::SegmentPartition::even(boundary, config.segments);
  sim::DgpSpec truth_dgp = dgp;
  truth_dgp.segments = config.segments;
  const sim::Truth truth = sim::truth(truth_dgp, boundary, partition);

  std::vector<RepOutcome> reps(n_reps);
  McReport report;
  report.n_reps = n_reps;
  report.seed = seed;
  for (std::size_t r = 0; r < n_reps; ++r) {
    report.rep_seeds.push_back(stream_seed(seed, stream::replication, r));
  }
  parallel_for(
      n_reps,
      [&](std::size_t r) {
        Engine engine(report.rep_seeds[r]);
        try {
          SampleFrame frame = derive_frame(sim::draw(dgp, boundary, engine), boundary, partition);
          reps[r] = config.target == Target::pooled
                        ? run_pooled(frame, truth, config)
                        : run_curve(frame, boundary, dgp, config, report.rep_seeds[r]);
        } catch (const Error& e) {
          if (is_input_error(e.code())) throw;
          reps[r].message = e.what();
        }
      },
      threads);

  std::size_t ok = 0, targets = 0, cov = 0, cov_rbc = 0, simul = 0, band = 0;
  double bias = 0.0, sq = 0.0, hsum = 0.0;
  for (std::size_t r = 0; r < n_reps; ++r) {
    const RepOutcome& o = reps[r];
    if (!o.ok) {
      ++report.failures;
      if (report.failure_messages.size() < 10) {
        report.failure_messages.push_back("rep " + std::to_string(r) + ": " + o.message);
      }
      continue;
    }
    ++ok;
    hsum += o.h;
    bool all = true;
    for (std::size_t k = 0; k < o.error.size(); ++k) {
      ++targets;
      bias += o.error[k];
      sq += o.error[k] * o.error[k];
      cov += o.covered[k];
      all = all && o.covered[k];
      if (k < o.covered_rbc.size()) cov_rbc += o.covered_rbc[k];
    }
    simul += all;
    band += o.band_all;
  }
  if (ok == 0) return report;
  report.coverage_conventional = double(cov) / double(targets);
  if (config.target == Target::pooled) {
    if (config.q) report.coverage_rbc = double(cov_rbc) / double(targets);
  } else {
    report.simultaneous_pointwise = double(simul) / double(ok);
    report.simultaneous_band = double(band) / double(ok);
  }
  report.mean_bias = bias / double(targets);
  report.mse = sq / double(targets);
  report.mean_h = hsum / double(ok);
  return report;
}

}  // namespace bdd::mc
