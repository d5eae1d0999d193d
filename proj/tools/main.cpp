// bdd: command-line front end for boundary discontinuity estimation.
//
// Exit codes: 0 success, 1 input error, 2 data cannot support the estimate.

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "bdd/bandwidth.hpp"
#include "bdd/curve.hpp"
#include "bdd/frame.hpp"
#include "bdd/io.hpp"
#include "bdd/monte_carlo.hpp"
#include "bdd/pooled.hpp"
#include "bdd/simulate.hpp"
#include "bdd/tube.hpp"

namespace {

using namespace bdd;

struct Common {
  std::string spec = "6";
  int p = 1;
  std::optional<int> q;
  bool no_rbc = false;
  std::string kernel = "triangular";
  std::string vce = "HC3";
  std::string h = "mse";
  int grid = 20;
  std::optional<int> segments;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t draws = 10000;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--spec", c.spec, "Pooled spec 1..8, or distance | location")->capture_default_str();
  cmd->add_option("--p", c.p, "Polynomial order")->capture_default_str();
  cmd->add_option("--q", c.q, "Order of the bias-correcting fit (default p + 1)");
  cmd->add_flag("--no-rbc", c.no_rbc, "Skip robust bias-corrected inference");
  cmd->add_option("--kernel", c.kernel, "uniform | triangular | epanechnikov")->capture_default_str();
  cmd->add_option("--vce", c.vce, "HC0 | HC1 | HC3")->capture_default_str();
  cmd->add_option("--h", c.h, "Bandwidth value, or mse for the plug-in")->capture_default_str();
  cmd->add_option("--grid", c.grid, "Grid points for curve estimators")->capture_default_str();
  cmd->add_option("--segments", c.segments, "Even partition into L pieces");
  cmd->add_option("--alpha", c.alpha, "Significance level")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Root seed")->capture_default_str();
  cmd->add_option("--draws", c.draws, "Gaussian draws for the uniform band")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

std::optional<int> rbc_order(const Common& c) {
  if (c.no_rbc) return std::nullopt;
  return c.q ? *c.q : c.p + 1;
}

bool is_curve(const std::string& spec) { return spec == "distance" || spec == "location"; }

int pooled_id(const std::string& spec) {
  int id = 0;
  auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), id);
  if (ec != std::errc() || ptr != spec.data() + spec.size() || id < 1 || id > 8) {
    throw Error(ErrorCode::InvalidArgument, "--spec must be 1..8, distance or location");
  }
  return id;
}

/// Fixed bandwidth, or nullopt for the plug-in.
std::optional<double> fixed_h(const std::string& h) {
  if (h == "mse") return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(h.data(), h.data() + h.size(), v);
  if (ec != std::errc() || ptr != h.data() + h.size()) {
    throw Error(ErrorCode::InvalidArgument, "--h must be a number or 'mse'");
  }
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::NonpositiveBandwidth, "--h must be positive, got " + h);
  }
  return v;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text(path, text);
  }
}

void print_warnings(const bandwidth::BandwidthResult& bw) {
  for (const auto& w : bw.warnings) std::cerr << "warning: " << w << "\n";
}

std::string pooled_csv(const pooled::EstimateResult& est) {
  std::string out = "segment,tau_hat,se,ci_lo,ci_hi,tau_rbc,rbc_lo,rbc_hi\n";
  for (std::size_t k = 0; k < est.tau_hat.size(); ++k) {
    const bool rbc = k < est.tau_rbc.size();
    out += std::to_string(k + 1) + "," + io::format_number(est.tau_hat[k]) + "," +
           io::format_number(est.se[k]) + "," + io::format_number(est.ci_conventional[k].lo) +
           "," + io::format_number(est.ci_conventional[k].hi) + "," +
           (rbc ? io::format_number(est.tau_rbc[k]) : "nan") + "," +
           (rbc ? io::format_number(est.ci_rbc[k].lo) : "nan") + "," +
           (rbc ? io::format_number(est.ci_rbc[k].hi) : "nan") + "\n";
  }
  return out;
}

int run_estimate(const std::string& data_path, const std::string& boundary_path, const Common& c,
                 const std::string& format, const std::string& weights, const std::string& out) {
  if (format != "json" && format != "csv") {
    throw Error(ErrorCode::InvalidArgument, "--out must be json or csv");
  }
  auto kernel = regression::parse_kernel(c.kernel);
  auto vce = regression::parse_vce(c.vce);
  auto h = fixed_h(c.h);
  auto bfile = io::load_boundary(boundary_path);
  auto partition = c.segments ? geometry::SegmentPartition::even(bfile.boundary, *c.segments)
                   : bfile.partition ? *bfile.partition
                                     : geometry::SegmentPartition::even(bfile.boundary, 1);
  Dataset data = load_dataset(data_path);
  SampleFrame frame = derive_frame(data, bfile.boundary, partition);
  const auto q = rbc_order(c);

  if (!is_curve(c.spec)) {
    pooled::PooledSpec spec{pooled_id(c.spec), c.p, partition.pieces(), kernel, 0.0, vce};
    std::optional<bandwidth::BandwidthResult> bw;
    if (h) {
      spec.h = *h;
    } else {
      const int order = pooled::uses_indicator_weights(spec) ? std::max(c.p, 1) : c.p;
      bw = bandwidth::h_mse_pooled(frame, order, kernel);
      print_warnings(*bw);
      spec.h = bw->h;
    }
    auto est = q ? pooled::estimate_rbc(spec, frame, *q, c.alpha) : pooled::estimate(spec, frame, c.alpha);
    emit(format == "json" ? io::to_json(est, bw ? &*bw : nullptr) : pooled_csv(est), out);
    return 0;
  }

  const auto method = curve::parse_method(c.spec);
  auto grid = curve::GridSpec::on(bfile.boundary, c.grid);
  curve::CurveOptions opt;
  opt.kernel = kernel;
  opt.vce = vce;
  opt.alpha = c.alpha;
  opt.n_draws = c.draws;
  opt.seed = c.seed;
  opt.threads = c.threads;
  std::optional<bandwidth::BandwidthResult> bw;
  if (h) {
    opt.h = *h;
  } else {
    bw = bandwidth::h_mse_integrated(frame, bfile.boundary, grid.points, c.p, kernel);
    print_warnings(*bw);
    opt.h = bw->h;
  }
  auto res = q ? curve::estimate_curve_rbc(method, frame, bfile.boundary, grid, c.p, *q, opt)
               : curve::estimate_curve(method, frame, bfile.boundary, grid, c.p, opt);
  for (const auto& m : res.messages) std::cerr << "note: " << m << "\n";
  if (res.n_missing == res.size()) {
    throw Error(ErrorCode::DegenerateDesign, "no grid point could be estimated");
  }
  std::optional<curve::AggregateResult> agg;
  if (res.size() - res.n_missing >= 2) {
    curve::WeightSpec ws;
    if (weights == "density") {
      ws.scheme = curve::WeightScheme::density;
      ws.frame = &frame;
    } else if (weights == "uniform") {
      ws.scheme = curve::WeightScheme::uniform;
    } else {
      throw Error(ErrorCode::InvalidArgument, "--weights must be density or uniform");
    }
    agg = curve::aggregate(res, bfile.boundary, ws);
  }
  emit(format == "json" ? io::to_json(res, agg ? &*agg : nullptr, bw ? &*bw : nullptr)
                        : io::to_csv(res),
       out);
  return 0;
}

int run_simulate(const std::string& dgp_path, const std::string& out, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> n) {
  auto dgp = sim::load_dgp(dgp_path);
  if (seed) dgp.seed = *seed;
  if (n) dgp.n = *n;
  auto s = sim::simulate(dgp);
  if (out.empty() || out == "-") {
    std::ostringstream csv;
    csv.precision(17);
    csv << "y,x1,x2\n";
    for (std::size_t i = 0; i < s.data.size(); ++i) {
      csv << io::format_number(s.data.y[i]) << "," << io::format_number(s.data.x[i].x1) << ","
          << io::format_number(s.data.x[i].x2) << "\n";
    }
    std::cout << csv.str();
    return 0;
  }
  write_dataset(out, s.data);
  io::write_text(out + ".truth.json", io::to_json(s.truth));
  io::write_text(out + ".boundary", io::format_boundary(s.boundary, &s.partition));
  std::cerr << "wrote " << out << ", " << out << ".truth.json, " << out << ".boundary\n";
  return 0;
}

int run_mc(const std::string& dgp_path, const Common& c, std::size_t reps, const std::string& out) {
  auto dgp = sim::load_dgp(dgp_path);
  mc::EstimatorConfig cfg;
  if (is_curve(c.spec)) {
    cfg.target = mc::Target::curve;
    cfg.method = curve::parse_method(c.spec);
  } else {
    cfg.spec = pooled_id(c.spec);
  }
  cfg.p = c.p;
  cfg.q = rbc_order(c);
  cfg.kernel = regression::parse_kernel(c.kernel);
  cfg.vce = regression::parse_vce(c.vce);
  cfg.h = fixed_h(c.h).value_or(0.0);
  cfg.grid = c.grid;
  cfg.segments = c.segments.value_or(1);
  cfg.alpha = c.alpha;
  cfg.n_draws = c.draws;
  auto report = mc::run(dgp, cfg, reps, c.seed, c.threads);
  emit(io::to_json(report), out);
  return 0;
}

int run_rdplot(const std::string& data_path, const std::string& boundary_path, int bins,
               const std::string& scheme, const std::string& h, const std::string& out) {
  auto bfile = io::load_boundary(boundary_path);
  auto partition = bfile.partition ? *bfile.partition : geometry::SegmentPartition::even(bfile.boundary, 1);
  SampleFrame frame = derive_frame(load_dataset(data_path), bfile.boundary, partition);
  std::optional<double> hv;
  if (!h.empty()) hv = fixed_h(h);
  emit(io::to_csv(pooled::rd_plot_bins(frame, bins, pooled::parse_bin_scheme(scheme), hv)), out);
  return 0;
}

int run_tube(const std::string& boundary_path, const std::vector<double>& box,
             const std::string& m, const std::vector<double>& hs, double cells,
             const std::string& out) {
  if (box.size() != 4) throw Error(ErrorCode::InvalidArgument, "--box needs x1lo x2lo x1hi x2hi");
  auto bfile = io::load_boundary(boundary_path);
  auto poly = sim::Polynomial::parse(m);
  Box support{{box[0], box[1]}, {box[2], box[3]}};
  auto rows = tube::verify_tube_limit(
      bfile.boundary, support, [&](Point x) { return poly(x); },
      [](double u) { return u < 1.0 ? 1.0 : 0.0; }, hs, cells);
  emit(io::to_json(rows), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary discontinuity designs: pooled and boundary-point estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bdd 0.1.0");

  // --h is the bandwidth, so subcommand help is --help only.
  Common common;
  std::string data, boundary, format = "json", weights = "density", output, dgp;

  auto* est = app.add_subcommand("estimate", "Estimate a pooled or boundary-point effect");
  est->set_help_flag("--help", "Print this help message and exit");
  est->add_option("--data", data, "CSV with header y,x1,x2")->required();
  est->add_option("--boundary", boundary, "Boundary file")->required();
  add_common(est, common);
  est->add_option("--out", format, "json | csv")->capture_default_str();
  est->add_option("--weights", weights, "WBATE weights for curves: density | uniform")->capture_default_str();
  est->add_option("-o,--output", output, "Output file (default stdout)");

  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_n;
  auto* simc = app.add_subcommand("simulate", "Draw a synthetic sample with quadrature truths");
  simc->add_option("--dgp-spec", dgp, "DGP key = value file")->required();
  simc->add_option("--out", output, "CSV path; truths and boundary go next to it");
  simc->add_option("--seed", sim_seed, "Override the file's seed");
  simc->add_option("--n", sim_n, "Override the file's sample size");

  std::size_t reps = 200;
  auto* mcc = app.add_subcommand("mc", "Monte Carlo coverage and bias experiment");
  mcc->set_help_flag("--help", "Print this help message and exit");
  mcc->add_option("--dgp-spec", dgp, "DGP key = value file")->required();
  mcc->add_option("--reps", reps, "Replications")->capture_default_str();
  add_common(mcc, common);
  mcc->add_option("-o,--output", output, "Output file (default stdout)");

  int bins = 20;
  std::string scheme = "es", rd_h;
  auto* rdp = app.add_subcommand("rdplot", "Binned outcome means against the signed distance");
  rdp->set_help_flag("--help", "Print this help message and exit");
  rdp->add_option("--data", data, "CSV with header y,x1,x2")->required();
  rdp->add_option("--boundary", boundary, "Boundary file")->required();
  rdp->add_option("--bins", bins, "Bins per side")->capture_default_str();
  rdp->add_option("--scheme", scheme, "es (evenly spaced) | qs (quantile spaced)")->capture_default_str();
  rdp->add_option("--h", rd_h, "Restrict to |D| <= h");
  rdp->add_option("-o,--output", output, "Output file (default stdout)");

  std::vector<double> box{-1.0, -1.0, 1.0, 1.0};
  std::vector<double> hs{0.1, 0.03, 0.01, 0.003, 0.001};
  std::string m = "1";
  double cells = 50.0;
  auto* tube = app.add_subcommand("tube-check", "Compare shrinking-tube integrals with their line-integral limit");
  tube->set_help_flag("--help", "Print this help message and exit");
  tube->add_option("--boundary", boundary, "Boundary file")->required();
  tube->add_option("--box", box, "Support rectangle x1lo x2lo x1hi x2hi")->expected(4);
  tube->add_option("--m", m, "Integrand polynomial in x1, x2")->capture_default_str();
  tube->add_option("--h", hs, "Tube half-widths");
  tube->add_option("--cells", cells, "Cells per h along each axis")->capture_default_str();
  tube->add_option("-o,--output", output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*est) return run_estimate(data, boundary, common, format, weights, output);
    if (*simc) return run_simulate(dgp, output, sim_seed, sim_n);
    if (*mcc) return run_mc(dgp, common, reps, output);
    if (*rdp) return run_rdplot(data, boundary, bins, scheme, rd_h, output);
    if (*tube) return run_tube(boundary, box, m, hs, cells, output);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
