#include "bdd/monte_carlo.hpp"

#include <gtest/gtest.h>

using namespace bdd;
using namespace bdd::mc;

namespace {

sim::DgpSpec dgp(double noise, const char* mu0 = "x1 + x2", const char* mu1 = "1 + x1 + x2") {
  sim::DgpSpec d;
  d.shape = sim::Shape::l_shape;
  d.mu0 = sim::Polynomial::parse(mu0);
  d.mu1 = sim::Polynomial::parse(mu1);
  d.noise_sd = noise;
  d.n = 400;
  return d;
}

void expect_identical(const McReport& a, const McReport& b) {
  EXPECT_EQ(a.n_reps, b.n_reps);
  EXPECT_EQ(a.failures, b.failures);
  EXPECT_EQ(a.rep_seeds, b.rep_seeds);
  EXPECT_EQ(a.coverage_conventional, b.coverage_conventional);
  EXPECT_EQ(a.coverage_rbc, b.coverage_rbc);
  EXPECT_EQ(a.simultaneous_pointwise, b.simultaneous_pointwise);
  EXPECT_EQ(a.simultaneous_band, b.simultaneous_band);
  EXPECT_EQ(a.mean_bias, b.mean_bias);
  EXPECT_EQ(a.mse, b.mse);
  EXPECT_EQ(a.mean_h, b.mean_h);
}

}  // namespace

TEST(MonteCarlo, SeededRerunsAreBitIdentical) {
  EstimatorConfig cfg;
  auto a = run(dgp(1.0), cfg, 20, 123, 1);
  auto b = run(dgp(1.0), cfg, 20, 123, 1);
  expect_identical(a, b);
  EXPECT_EQ(a.n_reps, 20u);
  EXPECT_EQ(a.rep_seeds.size(), 20u);
  EXPECT_NE(run(dgp(1.0), cfg, 20, 124, 1).mean_bias, a.mean_bias);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeTheReport) {
  EstimatorConfig cfg;
  cfg.target = Target::curve;
  cfg.grid = 5;
  cfg.h = 0.5;
  cfg.n_draws = 500;
  expect_identical(run(dgp(0.5), cfg, 8, 7, 1), run(dgp(0.5), cfg, 8, 7, 3));
}

TEST(MonteCarlo, ReplicationSeedsComeFromTheirOwnStreams) {
  EstimatorConfig cfg;
  auto r = run(dgp(1.0), cfg, 3, 55, 1);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_EQ(r.rep_seeds[k], stream_seed(55, stream::replication, k));
}

TEST(MonteCarlo, NoiselessNestedDesignCoversEveryTime) {
  EstimatorConfig cfg;
  cfg.spec = 1;
  cfg.h = 0.5;
  auto r = run(dgp(0.0, "0", "1"), cfg, 10, 3, 1);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_DOUBLE_EQ(r.coverage_conventional, 1.0);
  ASSERT_TRUE(r.coverage_rbc);
  EXPECT_DOUBLE_EQ(*r.coverage_rbc, 1.0);
  EXPECT_NEAR(r.mean_bias, 0.0, 1e-12);
}

TEST(MonteCarlo, RatesStayInTheUnitInterval) {
  EstimatorConfig cfg;
  cfg.target = Target::curve;
  cfg.grid = 6;
  cfg.n_draws = 500;
  auto r = run(dgp(1.0), cfg, 6, 11, 1);
  EXPECT_GE(r.coverage_conventional, 0.0);
  EXPECT_LE(r.coverage_conventional, 1.0);
  ASSERT_TRUE(r.simultaneous_band);
  EXPECT_LE(*r.simultaneous_pointwise, *r.simultaneous_band);
  EXPECT_GT(r.mean_h, 0.0);
}
