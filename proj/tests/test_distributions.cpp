#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "qagibbs/distributions.hpp"
#include "qagibbs/instances.hpp"

using namespace qagibbs;

namespace {

DiscreteDistribution random_distribution(Rng& rng, std::size_t n, double zero_fraction = 0.0) {
  std::vector<double> p(std::size_t{1} << n);
  double z = 0.0;
  for (auto& v : p) {
    v = uniform01(rng) < zero_fraction ? 0.0 : -std::log(1.0 - uniform01(rng));
    z += v;
  }
  if (z == 0.0) {
    p[0] = 1.0;
    z = 1.0;
  }
  for (auto& v : p) v /= z;
  return DiscreteDistribution(n, p);
}

}  // namespace

TEST(DiscreteDistribution, Validation) {
  EXPECT_THROW(DiscreteDistribution(2, {0.5, 0.5}), DimensionMismatch);
  EXPECT_THROW(DiscreteDistribution(1, {0.7, 0.7}), InvalidArgument);
  EXPECT_THROW(DiscreteDistribution(1, {1.5, -0.5}), InvalidArgument);
  EXPECT_NO_THROW(DiscreteDistribution(1, {0.25, 0.75}));
}

TEST(TotalVariation, Examples) {
  EXPECT_DOUBLE_EQ(total_variation(DiscreteDistribution::point_mass(2, 0), DiscreteDistribution::point_mass(2, 3)), 1.0);
  EXPECT_DOUBLE_EQ(total_variation(DiscreteDistribution::uniform(3), DiscreteDistribution::uniform(3)), 0.0);
  EXPECT_DOUBLE_EQ(total_variation(DiscreteDistribution(1, {0.25, 0.75}), DiscreteDistribution(1, {0.75, 0.25})), 0.5);
  EXPECT_THROW(total_variation(DiscreteDistribution::uniform(2), DiscreteDistribution::uniform(3)), DimensionMismatch);
}

TEST(TotalVariation, MetricAxiomsOnRandomTriples) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto p = random_distribution(rng, n, 0.3);
    const auto q = random_distribution(rng, n, 0.3);
    const auto r = random_distribution(rng, n, 0.3);
    const double pq = total_variation(p, q);
    ASSERT_GE(pq, 0.0);
    ASSERT_LE(pq, 1.0);
    ASSERT_EQ(total_variation(p, p), 0.0);
    ASSERT_NEAR(pq, total_variation(q, p), 1e-15);
    ASSERT_LE(total_variation(p, r), pq + total_variation(q, r) + 1e-14);
  }
}

TEST(KlDivergence, PinskerAndSupport) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_distribution(rng, 1 + trial % 5);
    const auto q = random_distribution(rng, 1 + trial % 5);
    const double tv = total_variation(p, q);
    const double kl = kl_divergence(p, q);
    ASSERT_GE(kl, 0.0);
    ASSERT_LE(tv, std::sqrt(kl / 2.0) + 1e-12);
  }
  EXPECT_EQ(kl_divergence(DiscreteDistribution::uniform(1), DiscreteDistribution::point_mass(1, 0)),
            std::numeric_limits<double>::infinity());
  EXPECT_EQ(kl_divergence(DiscreteDistribution::point_mass(1, 0), DiscreteDistribution::uniform(1)), std::log(2.0));
}

TEST(Empirical, CountsAndErrors) {
  const std::vector<StateIndex> s{0, 1, 1, 3};
  const auto e = empirical_distribution(s, 2);
  EXPECT_DOUBLE_EQ(e[0], 0.25);
  EXPECT_DOUBLE_EQ(e[1], 0.5);
  EXPECT_DOUBLE_EQ(e[2], 0.0);
  EXPECT_DOUBLE_EQ(e[3], 0.25);
  EXPECT_THROW(empirical_distribution(std::vector<StateIndex>{}, 2), InvalidArgument);
  EXPECT_THROW(empirical_distribution(std::vector<StateIndex>{4}, 2), DimensionMismatch);
}

TEST(AlphaGrid, ThirtyBandedPoints) {
  const auto g = build_alpha_grid(1.0);
  ASSERT_EQ(g.points.size(), 30u);
  EXPECT_DOUBLE_EQ(g.points.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.points.back(), 1.0);
  EXPECT_NEAR(g.points[1], 0.0125, 1e-15);
  EXPECT_NEAR(g.points[8], 0.1, 1e-15);
  EXPECT_NEAR(g.points[24], 0.5, 1e-15);
  EXPECT_NEAR(g.points[25], 0.6, 1e-15);
  for (std::size_t k = 1; k < g.points.size(); ++k) ASSERT_LT(g.points[k - 1], g.points[k]);
  const auto g10 = build_alpha_grid(10.0);
  for (std::size_t k = 0; k < 30; ++k) EXPECT_NEAR(g10.points[k], 10.0 * g.points[k], 1e-12);
  EXPECT_THROW(build_alpha_grid(0.0), InvalidArgument);
  EXPECT_THROW(build_alpha_grid(-1.0), InvalidArgument);
}

TEST(FitAlpha, RecoversEveryGridPointExactly) {
  const auto m = find_instance("GSD-6").model;
  const GibbsGrid gibbs(m, build_alpha_grid(3.0));
  for (std::size_t k = 0; k < gibbs.grid().points.size(); ++k) {
    const auto f = gibbs.fit(enumerate_gibbs(m, gibbs.grid().points[k]));
    EXPECT_EQ(f.grid_index, k);
    EXPECT_LT(f.tv_min, 1e-12);
  }
}

TEST(FitAlpha, TiesGoToSmallerAlpha) {
  // A model with all-zero parameters has the same Gibbs law at every alpha.
  const IsingModel flat({1, 2}, {{1, 2, 0.0}});
  const auto f = fit_alpha_out(DiscreteDistribution::uniform(2), flat, build_alpha_grid(1.0));
  EXPECT_EQ(f.grid_index, 0u);
  EXPECT_EQ(f.alpha_out, 0.0);
}

TEST(FitAlpha, UniformFitsAlphaZero) {
  const auto m = find_instance("GSD-2").model;
  const auto f = fit_alpha_out(DiscreteDistribution::uniform(16), m, build_alpha_grid(10.0));
  EXPECT_EQ(f.alpha_out, 0.0);
  EXPECT_EQ(f.tv_min, 0.0);
  EXPECT_EQ(f.tv_curve.size(), 30u);
}

TEST(FiniteSamplingFloor, DeterministicAndShrinking) {
  const auto target = DiscreteDistribution::uniform(8);
  const auto a = finite_sampling_floor(target, 1000, 4, 3);
  const auto b = finite_sampling_floor(target, 1000, 4, 3);
  EXPECT_EQ(a.per_trial, b.per_trial);
  const auto c = finite_sampling_floor(target, 100000, 4, 3);
  EXPECT_LT(c.mean, a.mean);
  // 1/2 E|N/M - p| ~ sqrt(p(1-p)/M) * sqrt(2/pi) summed over states, /2
  const double p = 1.0 / 256.0;
  const double expected = 0.5 * 256 * std::sqrt(p * (1 - p) / 100000.0) * std::sqrt(2.0 / M_PI);
  EXPECT_NEAR(c.mean, expected, 0.1 * expected);
}

TEST(FiniteSamplingFloor, PointMassHasZeroFloor) {
  EXPECT_EQ(finite_sampling_floor(DiscreteDistribution::point_mass(3, 5), 100, 3, 0).mean, 0.0);
  EXPECT_THROW(finite_sampling_floor(DiscreteDistribution::uniform(2), 0, 3, 0), InvalidArgument);
}

TEST(DrawStates, BinomialTolerance) {
  const IsingModel m({0}, {}, {{0, 1.0}});
  Rng rng(2024);
  const auto states = draw_states(enumerate_gibbs(m, 1.0), 1000000, rng);
  const auto e = empirical_distribution(states, 1);
  const double p = std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0));
  EXPECT_NEAR(e[1], p, 3.0 * std::sqrt(p * (1 - p) / 1e6));
}
