#include "bdd/bandwidth.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bdd/simulate.hpp"
#include "fixtures.hpp"

using namespace bdd;
using namespace bdd::bandwidth;
using regression::KernelKind;

namespace {

sim::Simulation curved_l(std::size_t n, std::uint64_t seed) {
  sim::DgpSpec dgp;
  dgp.shape = sim::Shape::l_shape;
  dgp.mu0 = sim::Polynomial::parse("0.5 + 0.5*x1 + 0.8*x2 + 2*x2^2 + 0.5*x1^2");
  dgp.mu1 = sim::Polynomial::parse("1 + 0.9*x1 - 1.5*x2^2 - 0.4*x1^2 + 0.6*x1*x2");
  dgp.noise_sd = 0.5;
  dgp.n = n;
  dgp.seed = seed;
  return sim::simulate(dgp);
}

SampleFrame frame_of(const sim::Simulation& s) {
  return derive_frame(s.data, s.boundary, s.partition);
}

/// Scores and boundary scaled by c; outcomes unchanged.
std::pair<SampleFrame, geometry::Boundary> scaled(const sim::Simulation& s, double c) {
  Dataset d = s.data;
  for (Point& x : d.x) x = c * x;
  std::vector<Point> v;
  for (Point p : s.boundary.vertices()) v.push_back(c * p);
  geometry::Boundary b(v, s.boundary.closed(), s.boundary.treated_side());
  return {derive_frame(d, b, geometry::SegmentPartition::even(b, 1)), b};
}

}  // namespace

TEST(PlugIn, RateAndVarianceScaling) {
  for (int p : {0, 1, 2}) {
    double h = plug_in_h(1.3, 0.7, 1000, p, 1);
    EXPECT_NEAR(plug_in_h(1.3, 0.7, 4000, p, 1) / h, std::pow(4.0, -1.0 / (2 * p + 3)), 1e-12);
    EXPECT_NEAR(plug_in_h(1.3, 1.4, 1000, p, 1) / h, std::pow(2.0, 1.0 / (2 * p + 3)), 1e-12);
    double h2 = plug_in_h(1.3, 0.7, 1000, p, 2);
    EXPECT_NEAR(plug_in_h(1.3, 0.7, 4000, p, 2) / h2, std::pow(4.0, -1.0 / (2 * p + 4)), 1e-12);
  }
}

TEST(PlugIn, MinimisesTheProxy) {
  const double B = 0.8, V = 2.0;
  const std::size_t n = 500;
  for (int dim : {1, 2}) {
    double h = plug_in_h(B, V, n, 1, dim);
    auto mse = [&](double t) { return B * B * std::pow(t, 4) + V / (double(n) * std::pow(t, dim)); };
    EXPECT_LT(mse(h), mse(h * 1.01));
    EXPECT_LT(mse(h), mse(h * 0.99));
  }
}

TEST(KernelConstants, UniformLocalConstantAtABoundary) {
  // One-sided local mean: bias int_0^1 u du = 1/2, variance 1 / int_0^1 1 du = 1.
  auto c = univariate_constants(KernelKind::uniform, 0);
  EXPECT_NEAR(c.bias, 0.5, 1e-12);
  EXPECT_NEAR(c.variance, 1.0, 1e-12);
}

TEST(KernelConstants, UniformLocalLinearAtABoundary) {
  // Equivalent kernel 4 - 6u on [0, 1]: bias -1/6, variance 4.
  auto c = univariate_constants(KernelKind::uniform, 1);
  EXPECT_NEAR(std::abs(c.bias), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(c.variance, 4.0, 1e-12);
}

TEST(HmsePooled, ExponentAndFormula) {
  auto s = curved_l(2000, 1);
  auto f = frame_of(s);
  auto r = h_mse_pooled(f, 1, KernelKind::triangular);
  EXPECT_FALSE(r.fallback);
  EXPECT_DOUBLE_EQ(r.exponent, 1.0 / 5.0);
  EXPECT_EQ(r.pilot_order, 3);
  EXPECT_NEAR(r.h, plug_in_h(r.bias_constant, r.variance_constant, f.size(), 1, 1), 1e-12);
  EXPECT_GT(r.h, 0.0);
  EXPECT_LE(r.h, score_diameter(f));
}

TEST(HmsePooled, ScaleEquivariance) {
  auto s = curved_l(1500, 2);
  auto [f1, b1] = scaled(s, 1.0);
  auto [f3, b3] = scaled(s, 3.0);
  double h1 = h_mse_pooled(f1, 1, KernelKind::triangular).h;
  double h3 = h_mse_pooled(f3, 1, KernelKind::triangular).h;
  EXPECT_NEAR(h3 / h1, 3.0, 3.0 * 1e-8);
}

TEST(HmsePooled, Deterministic) {
  auto f = frame_of(curved_l(800, 3));
  EXPECT_EQ(h_mse_pooled(f, 1, KernelKind::triangular).h,
            h_mse_pooled(f, 1, KernelKind::triangular).h);
}

TEST(HmsePooled, SamplesBelowThePilotMinimumAreRejected) {
  try {
    h_mse_pooled(frame_of(curved_l(30, 4)), 1, KernelKind::triangular);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(HmsePooled, ThinSidesFallBackWithAFlag) {
  std::vector<double> d, y;
  for (int i = 0; i < 60; ++i) {
    d.push_back(i < 3 ? 0.1 * (i + 1) : -0.01 * i);
    y.push_back(std::sin(double(i)));
  }
  auto f = frame_from_distance(y, d);
  auto r = h_mse_pooled(f, 1, KernelKind::triangular);
  EXPECT_TRUE(r.fallback);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("rule-of-thumb"), std::string::npos);
  EXPECT_GT(r.h, 0.0);
  EXPECT_LE(r.h, score_diameter(f));
}

TEST(HmsePooled, LargeSelectionsAreClampedToTheSupport) {
  // Mirror-image sides: the pilot curvatures cancel, so the raw plug-in
  // bandwidth diverges.
  std::vector<double> d, y;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    double di = (i + 0.5) / 200.0, yi = di * di + g(rng);
    d.push_back(di), y.push_back(yi);
    d.push_back(-di), y.push_back(yi);
  }
  auto f = frame_from_distance(y, d);
  auto r = h_mse_pooled(f, 1, KernelKind::triangular);
  EXPECT_FALSE(r.fallback);
  EXPECT_DOUBLE_EQ(r.h, score_diameter(f));
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.back().find("clamped"), std::string::npos);
}

TEST(HmseLocation, ExponentAndFormula) {
  auto s = curved_l(3000, 5);
  auto f = frame_of(s);
  auto r = h_mse_location(f, s.boundary, {0.5, 0.0}, 1, KernelKind::triangular);
  EXPECT_FALSE(r.fallback);
  EXPECT_DOUBLE_EQ(r.exponent, 1.0 / 6.0);
  EXPECT_NEAR(r.h, plug_in_h(r.bias_constant, r.variance_constant, f.size(), 1, 2), 1e-12);
}

TEST(HmseLocation, SinglePointIntegratedEqualsPointwise) {
  auto s = curved_l(2000, 6);
  auto f = frame_of(s);
  Point b{0.4, 0.0};
  EXPECT_DOUBLE_EQ(h_mse_integrated(f, s.boundary, {b}, 1, KernelKind::triangular).h,
                   h_mse_location(f, s.boundary, b, 1, KernelKind::triangular).h);
}

TEST(HmseLocation, IntegratedLiesBetweenThePointwiseBandwidths) {
  auto s = curved_l(3000, 7);
  auto f = frame_of(s);
  auto grid = geometry::discretize(s.boundary, 8);
  double lo = INFINITY, hi = 0.0;
  for (Point b : grid) {
    double h = h_mse_location(f, s.boundary, b, 1, KernelKind::triangular).h;
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  double h = h_mse_integrated(f, s.boundary, grid, 1, KernelKind::triangular).h;
  EXPECT_GE(h, lo);
  EXPECT_LE(h, hi);
}

TEST(HmseLocation, ScaleEquivariance) {
  auto s = curved_l(2000, 8);
  auto [f1, b1] = scaled(s, 1.0);
  auto [f5, b5] = scaled(s, 0.2);
  auto grid1 = geometry::discretize(b1, 5);
  auto grid5 = geometry::discretize(b5, 5);
  double h1 = h_mse_integrated(f1, b1, grid1, 1, KernelKind::triangular).h;
  double h5 = h_mse_integrated(f5, b5, grid5, 1, KernelKind::triangular).h;
  EXPECT_NEAR(h5 / h1, 0.2, 0.2 * 1e-8);
}

TEST(Regularity, SharpAnglesWarn) {
  geometry::Boundary sharp({{1, 0}, {0, 0}, {1, 0.2}}, false, geometry::Side::left);
  EXPECT_EQ(regularity_warnings(sharp, std::numbers::pi / 2.0).size(), 1u);
  EXPECT_TRUE(regularity_warnings(bdd::testing::l_boundary(), std::numbers::pi / 4.0).empty());
}
