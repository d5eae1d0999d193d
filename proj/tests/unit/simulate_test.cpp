#include "bdd/simulate.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "bdd/curve.hpp"
#include "bdd/pooled.hpp"
#include "bdd/stats.hpp"

using namespace bdd;
using namespace bdd::sim;

namespace {

DgpSpec l_dgp(const char* mu0, const char* mu1) {
  DgpSpec d;
  d.shape = Shape::l_shape;
  d.mu0 = Polynomial::parse(mu0);
  d.mu1 = Polynomial::parse(mu1);
  d.n = 500;
  d.seed = 17;
  return d;
}

}  // namespace

TEST(Polynomial, ParseEvaluateAndPrint) {
  auto p = Polynomial::parse("1 + 0.5*x1 - 2*x1^2*x2 + x2^3");
  EXPECT_DOUBLE_EQ(p({2.0, 3.0}), 1 + 1 - 24 + 27);
  auto again = Polynomial::parse(p.str());
  for (Point x : {Point{0.3, -0.7}, Point{-1.2, 2.0}}) EXPECT_DOUBLE_EQ(again(x), p(x));
  EXPECT_DOUBLE_EQ(Polynomial::parse("-x2")({0, 4}), -4.0);
  EXPECT_DOUBLE_EQ(Polynomial::parse("3e-1*x1*x1")({2, 0}), 1.2);
}

TEST(Polynomial, MalformedInputThrows) {
  for (const char* bad : {"", "1 +", "x3", "2*x1^", "1 ** x1", "abc"}) {
    EXPECT_THROW(Polynomial::parse(bad), Error) << bad;
  }
}

TEST(DgpFile, ParsesEveryKey) {
  auto d = parse_dgp(
      "# comment\n"
      "boundary = jagged\nkinks = 3\namplitude = 0.1\n"
      "box = 0 0 2 1\nmu0 = x1\nmu1 = 1 + x2\nnoise_sd = 0.25\n"
      "density = tilted\ntilt = 0.5\nn = 123\nseed = 9\ngrid = 12\nsegments = 3\n");
  EXPECT_EQ(d.shape, Shape::jagged);
  EXPECT_EQ(d.kinks, 3);
  EXPECT_DOUBLE_EQ(d.jag_amplitude, 0.1);
  EXPECT_EQ(d.box.hi, (Point{2, 1}));
  EXPECT_DOUBLE_EQ(d.tau({1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(d.noise_sd, 0.25);
  EXPECT_EQ(d.density, DensityKind::tilted);
  EXPECT_EQ(d.n, 123u);
  EXPECT_EQ(d.seed, 9u);
  EXPECT_EQ(d.grid, 12);
  EXPECT_EQ(d.segments, 3);
  EXPECT_EQ(make_boundary(d).vertices().size(), 5u);
}

TEST(DgpFile, RejectsBadInput) {
  EXPECT_THROW(parse_dgp("colour = blue\n"), Error);
  EXPECT_THROW(parse_dgp("n = many\n"), Error);
  EXPECT_THROW(parse_dgp("box = 0 0 1\n"), Error);
  EXPECT_THROW(parse_dgp("noise_sd = -1\n"), Error);
  EXPECT_THROW(parse_dgp("just text\n"), Error);
}

TEST(Density, IntegratesToOne) {
  DgpSpec d;
  d.density = DensityKind::tilted;
  d.tilt = 2.0;
  // Midpoint rule over the box.
  double total = 0.0;
  const int m = 200;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      total += d.density_at({-1 + 2 * (i + 0.5) / m, -1 + 2 * (j + 0.5) / m}) * (4.0 / (m * m));
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(d.density_at({2.0, 0.0}), 0.0);
}

TEST(Draw, TiltShiftsTheScores) {
  DgpSpec d = l_dgp("0", "0");
  d.density = DensityKind::tilted;
  d.tilt = 3.0;
  d.n = 20000;
  auto s = simulate(d);
  double m = 0.0;
  for (Point x : s.data.x) m += x.x1;
  m /= double(s.data.size());
  // Density (1 + 3u)/2.5 in u = (x1 + 1)/2 has E[u] = 0.6, so E[x1] = 0.2.
  EXPECT_NEAR(m, 0.2, 0.02);
}

TEST(Truth, HorizontalArmEffect) {
  // tau = x1 is x1 on the horizontal arm and 0 on the vertical one.
  auto s = simulate(l_dgp("0", "x1"));
  EXPECT_NEAR(s.truth.bate, 0.25, 1e-12);
  EXPECT_NEAR(s.truth.wbate_uniform, 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(s.truth.lbate, 1.0);
  EXPECT_LT(s.truth.quadrature_error, 1e-12);
}

TEST(Truth, TiltedDensityWeighting) {
  DgpSpec d = l_dgp("0", "x1");
  d.density = DensityKind::tilted;
  d.tilt = 1.0;
  // (1/2 + 5t/12) / (2 + 5t/4) at t = 1.
  EXPECT_NEAR(simulate(d).truth.bate, 11.0 / 39.0, 1e-12);
}

TEST(Truth, ConstantEffectAgreesEverywhere) {
  DgpSpec d = l_dgp("x1 + x2^2", "1.5 + x1 + x2^2");
  d.density = DensityKind::tilted;
  d.tilt = 0.7;
  d.segments = 3;
  auto t = simulate(d).truth;
  EXPECT_NEAR(t.bate, 1.5, 1e-10);
  EXPECT_NEAR(t.wbate_uniform, 1.5, 1e-10);
  EXPECT_NEAR(t.lbate, 1.5, 1e-10);
  for (double v : t.segment_bate) EXPECT_NEAR(v, 1.5, 1e-10);
}

TEST(Simulate, SeededRunsAreIdentical) {
  auto d = l_dgp("x1", "1 + x2");
  auto a = simulate(d), b = simulate(d);
  EXPECT_EQ(a.data.y, b.data.y);
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_EQ(a.data.x[i], b.data.x[i]);
  d.seed = 18;
  EXPECT_NE(simulate(d).data.y, a.data.y);
}

TEST(Simulate, TreatmentFollowsTheBoundary) {
  auto s = simulate(l_dgp("0", "0"));
  for (Point x : s.data.x) {
    bool inside = x.x1 >= 0.0 && x.x2 >= 0.0;
    EXPECT_EQ(geometry::region_of(s.boundary, x) == geometry::Region::A1, inside);
  }
}

TEST(Simulate, CsvRoundTripReproducesTheFrame) {
  auto s = simulate(l_dgp("x1", "1 + x2"));
  auto direct = derive_frame(s.data, s.boundary, s.partition);
  auto path = (std::filesystem::temp_directory_path() / "bdd_sim_roundtrip.csv").string();
  write_dataset(path, s.data);
  auto loaded = derive_frame(load_dataset(path), s.boundary, s.partition);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded.distance, direct.distance);
  EXPECT_EQ(loaded.treated, direct.treated);
  EXPECT_EQ(loaded.segment, direct.segment);
}

TEST(Simulate, NoEffectNoNoiseEstimatesZero) {
  // Flat surfaces: every estimator compares identical outcomes.
  DgpSpec d = l_dgp("2", "2");
  d.noise_sd = 0.0;
  d.n = 2000;
  auto s = simulate(d);
  auto f = derive_frame(s.data, s.boundary, s.partition);
  pooled::PooledSpec spec;
  spec.h = 0.3;
  for (int id = 1; id <= 8; ++id) {
    spec.id = id;
    EXPECT_NEAR(pooled::estimate(spec, f).tau_hat[0], 0.0, 1e-10) << id;
  }
  curve::CurveOptions o;
  o.h = 0.4;
  o.n_draws = 0;
  auto grid = curve::GridSpec::on(s.boundary, 7);
  for (auto m : {curve::Method::distance, curve::Method::location}) {
    auto c = curve::estimate_curve(m, f, s.boundary, grid, 1, o);
    for (double t : c.tau_hat) EXPECT_NEAR(t, 0.0, 1e-10);
  }

  // A shared linear surface is nested by the location fit.
  d = l_dgp("1 + x1 - x2", "1 + x1 - x2");
  d.noise_sd = 0.0;
  d.n = 2000;
  s = simulate(d);
  f = derive_frame(s.data, s.boundary, s.partition);
  auto c = curve::estimate_location(f, s.boundary, grid, 1, o);
  for (double t : c.tau_hat) EXPECT_NEAR(t, 0.0, 1e-10);
}
