#include <benchmark/benchmark.h>

#include <random>

#include "bdd/bandwidth.hpp"
#include "bdd/curve.hpp"
#include "bdd/pooled.hpp"
#include "bdd/simulate.hpp"
#include "bdd/tube.hpp"

using namespace bdd;

namespace {

sim::Simulation demo(std::size_t n) {
  sim::DgpSpec d;
  d.shape = sim::Shape::l_shape;
  d.mu0 = sim::Polynomial::parse("0.5 + 0.5*x1 + 0.8*x2 + 2*x2^2");
  d.mu1 = sim::Polynomial::parse("1 + 0.9*x1 - 1.5*x2^2 + 0.6*x1*x2");
  d.noise_sd = 0.5;
  d.n = n;
  d.seed = 1;
  return sim::simulate(d);
}

geometry::Boundary zigzag(int vertices) {
  std::vector<Point> v;
  for (int k = 0; k < vertices; ++k) v.push_back({double(k), k % 2 ? 0.5 : 0.0});
  return geometry::Boundary(v, false, geometry::Side::left);
}

}  // namespace

static void BM_ClosestPoint(benchmark::State& state) {
  auto b = zigzag(int(state.range(0)));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, double(state.range(0) - 1));
  std::vector<Point> q(1024);
  for (auto& p : q) p = {u(rng), u(rng) * 0.1 - 0.5};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(geometry::closest_point(b, q[i++ & 1023]));
}
BENCHMARK(BM_ClosestPoint)->Arg(3)->Arg(32)->Arg(256);

static void BM_DeriveFrame(benchmark::State& state) {
  auto s = demo(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(derive_frame(s.data, s.boundary, s.partition));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DeriveFrame)->Arg(10000);

static void BM_Wls(benchmark::State& state) {
  const Eigen::Index n = state.range(0), k = 6;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Eigen::MatrixXd Z(n, k);
  Eigen::VectorXd Y(n), W = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) Z(i, j) = g(rng);
    Y(i) = g(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(regression::wls(Z, Y, W));
}
BENCHMARK(BM_Wls)->Arg(1000)->Arg(10000);

static void BM_PooledSpec6(benchmark::State& state) {
  auto s = demo(std::size_t(state.range(0)));
  auto f = derive_frame(s.data, s.boundary, s.partition);
  pooled::PooledSpec spec;
  spec.h = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(pooled::estimate_rbc(spec, f, 2));
}
BENCHMARK(BM_PooledSpec6)->Arg(2000)->Arg(20000);

static void BM_LocationCurve(benchmark::State& state) {
  auto s = demo(5000);
  auto f = derive_frame(s.data, s.boundary, s.partition);
  auto grid = curve::GridSpec::on(s.boundary, int(state.range(0)));
  curve::CurveOptions o;
  o.h = 0.3;
  o.n_draws = 2000;
  o.threads = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        curve::estimate_curve_rbc(curve::Method::location, f, s.boundary, grid, 1, 2, o));
}
BENCHMARK(BM_LocationCurve)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_BandwidthPooled(benchmark::State& state) {
  auto s = demo(5000);
  auto f = derive_frame(s.data, s.boundary, s.partition);
  for (auto _ : state)
    benchmark::DoNotOptimize(bandwidth::h_mse_pooled(f, 1, regression::KernelKind::triangular));
}
BENCHMARK(BM_BandwidthPooled);

static void BM_BandwidthIntegrated(benchmark::State& state) {
  auto s = demo(5000);
  auto f = derive_frame(s.data, s.boundary, s.partition);
  auto grid = geometry::discretize(s.boundary, 20);
  for (auto _ : state)
    benchmark::DoNotOptimize(bandwidth::h_mse_integrated(f, s.boundary, grid, 1,
                                                         regression::KernelKind::triangular));
}
BENCHMARK(BM_BandwidthIntegrated)->Unit(benchmark::kMillisecond);

static void BM_SupTCritical(benchmark::State& state) {
  const Eigen::Index J = state.range(0);
  Eigen::MatrixXd cov(J, J);
  for (Eigen::Index i = 0; i < J; ++i)
    for (Eigen::Index j = 0; j < J; ++j) cov(i, j) = std::exp(-0.3 * std::abs(double(i - j)));
  for (auto _ : state) benchmark::DoNotOptimize(curve::sup_t_critical(cov, 0.05, 10000, 3));
}
BENCHMARK(BM_SupTCritical)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_TubeIntegral(benchmark::State& state) {
  auto b = geometry::Boundary({{1, 0}, {0, 0}, {0, 1}}, false, geometry::Side::right);
  const double h = 1.0 / double(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(tube::tube_integral(
        b, Box{{-1, -1}, {1, 1}}, [](Point) { return 1.0; },
        [](double u) { return u < 1.0 ? 1.0 : 0.0; }, h));
}
BENCHMARK(BM_TubeIntegral)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
