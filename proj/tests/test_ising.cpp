#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qagibbs/ising.hpp"
#include "qagibbs/random.hpp"

using namespace qagibbs;

namespace {

// Reference energy straight from the definition, spins read off the index.
double naive_energy(const IsingModel& m, StateIndex s) {
  auto spin = [&](SiteId site) {
    std::size_t k = 0;
    while (m.sites()[k] != site) ++k;
    return ((s >> k) & 1U) ? 1.0 : -1.0;
  };
  double e = 0.0;
  for (const auto& c : m.couplings()) e -= c.value * spin(c.i) * spin(c.j);
  for (const auto& f : m.fields()) e -= f.value * spin(f.site);
  return e;
}

IsingModel random_model(Rng& rng, std::size_t n, bool integer, double density = 0.6) {
  std::vector<SiteId> sites;
  for (std::size_t k = 0; k < n; ++k) sites.push_back(static_cast<SiteId>(10 + 3 * k));
  std::vector<Coupling> couplings;
  std::vector<Field> fields;
  auto draw = [&] { return integer ? double(random_sign(rng)) : 2.0 * uniform01(rng) - 1.0; };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (uniform01(rng) < density) couplings.push_back({sites[a], sites[b], draw()});
    }
    if (uniform01(rng) < 0.5) fields.push_back({sites[a], draw()});
  }
  return IsingModel(sites, couplings, fields);
}

}  // namespace

TEST(IsingModel, RejectsMalformedInput) {
  EXPECT_THROW(IsingModel({1, 1}, {}), InvalidArgument);
  EXPECT_THROW(IsingModel({1, 2}, {{1, 1, 1.0}}), InvalidArgument);
  EXPECT_THROW(IsingModel({1, 2}, {{1, 3, 1.0}}), InvalidArgument);
  EXPECT_THROW(IsingModel({1, 2}, {{1, 2, 1.0}, {2, 1, 1.0}}), InvalidArgument);
  EXPECT_THROW(IsingModel({1, 2}, {{1, 2, NAN}}), InvalidArgument);
  EXPECT_THROW(IsingModel({1, 2}, {}, {{3, 1.0}}), InvalidArgument);
}

TEST(IsingModel, CanonicalIndexRoundTrip) {
  for (StateIndex s = 0; s < 32; ++s) EXPECT_EQ(SpinConfig::from_index(s, 5).index(), s);
  const auto c = SpinConfig::from_index(0b101, 3);
  EXPECT_EQ(c[0], 1);
  EXPECT_EQ(c[1], -1);
  EXPECT_EQ(c[2], 1);
  EXPECT_THROW(SpinConfig({1, 0, -1}), InvalidArgument);
}

TEST(Energy, TwoSpinFerromagnet) {
  const IsingModel m({1, 2}, {{1, 2, 1.0}});
  EXPECT_DOUBLE_EQ(energy(m, SpinConfig({1, 1})), -1.0);
  EXPECT_DOUBLE_EQ(energy(m, SpinConfig({-1, -1})), -1.0);
  EXPECT_DOUBLE_EQ(energy(m, SpinConfig({1, -1})), 1.0);
  EXPECT_THROW(energy(m, SpinConfig({1, 1, 1})), ConfigurationMismatch);
}

TEST(Energy, TableMatchesDirectEvaluation) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const bool integer = trial % 2 == 0;
    const auto m = random_model(rng, 3 + trial % 7, integer);
    const auto table = energy_table(m);
    for (StateIndex s = 0; s < table.size(); ++s) ASSERT_NEAR(table[s], naive_energy(m, s), 1e-12);
  }
}

TEST(Energy, IntegerTableForScaledCatalogStyleModel) {
  Rng rng(11);
  const auto m = random_model(rng, 10, true).scaled(0.3);
  const auto table = energy_table(m);
  for (StateIndex s = 0; s < table.size(); ++s) ASSERT_NEAR(table[s], naive_energy(m, s), 1e-12);
}

TEST(Gibbs, SingleSpinField) {
  const IsingModel m({0}, {}, {{0, 1.0}});
  const auto p = enumerate_gibbs(m, 1.0);
  EXPECT_NEAR(p[1], std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(p[1], 0.8808, 1e-4);
}

TEST(Gibbs, AlphaZeroIsUniformAndNegativeRejected) {
  Rng rng(3);
  const auto m = random_model(rng, 6, false);
  const auto p = enumerate_gibbs(m, 0.0);
  for (std::size_t s = 0; s < p.size(); ++s) EXPECT_DOUBLE_EQ(p[s], 1.0 / 64.0);
  EXPECT_THROW(enumerate_gibbs(m, -0.1), InvalidArgument);
}

TEST(Gibbs, LargeAlphaStaysFiniteAndConcentrates) {
  const IsingModel m({1, 2, 3}, {{1, 2, 1.0}, {2, 3, 1.0}});
  const auto p = enumerate_gibbs(m, 2000.0);
  double sum = 0.0;
  for (double v : p.probs()) {
    ASSERT_TRUE(std::isfinite(v));
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(p[0b000], 0.5, 1e-12);
  EXPECT_NEAR(p[0b111], 0.5, 1e-12);
}

TEST(Gibbs, MatchesDefinitionOnRandomModels) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_model(rng, 5, false);
    const double alpha = 0.1 + trial * 0.4;
    const auto p = enumerate_gibbs(m, alpha);
    double z = 0.0;
    for (StateIndex s = 0; s < 32; ++s) z += std::exp(-alpha * naive_energy(m, s));
    for (StateIndex s = 0; s < 32; ++s) EXPECT_NEAR(p[s], std::exp(-alpha * naive_energy(m, s)) / z, 1e-13);
  }
}

TEST(Gibbs, RefusesOversizedModels) {
  std::vector<SiteId> sites;
  for (int k = 0; k < 21; ++k) sites.push_back(k);
  const IsingModel m(sites, {});
  EXPECT_THROW(enumerate_gibbs(m, 1.0), CapacityError);
  EXPECT_THROW(ground_states(m), CapacityError);
}

TEST(GroundStates, FerromagneticChain) {
  const IsingModel m({1, 2, 3, 4}, {{1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}});
  const auto gs = ground_states(m);
  EXPECT_EQ(gs.degeneracy, 2u);
  EXPECT_DOUBLE_EQ(gs.min_energy, -3.0);
  EXPECT_EQ(gs.indices, (std::vector<StateIndex>{0b0000, 0b1111}));
}

TEST(GroundStates, MatchesNaiveCountOnRandomIntegerModels) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_model(rng, 4 + trial % 8, true);
    double best = 1e300;
    for (StateIndex s = 0; s < (1u << m.num_sites()); ++s) best = std::min(best, naive_energy(m, s));
    std::size_t count = 0;
    for (StateIndex s = 0; s < (1u << m.num_sites()); ++s) count += naive_energy(m, s) == best ? 1 : 0;
    EXPECT_EQ(ground_states(m).degeneracy, count);
    EXPECT_EQ(ground_states(m).min_energy, best);
  }
}

TEST(GroundStates, ZeroFieldDegeneracyIsEven) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_model(rng, 8, true);
    const IsingModel no_fields(m.sites(), m.couplings());
    EXPECT_EQ(ground_states(no_fields).degeneracy % 2, 0u);
  }
}

TEST(Gauge, EnergyCovariance) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_model(rng, 7, false);
    const auto a = GaugeVector::random(m.num_sites(), rng);
    const auto mg = gauge_transform(m, a);
    for (StateIndex s = 0; s < 128; ++s) {
      const auto c = SpinConfig::from_index(s, 7);
      EXPECT_NEAR(energy(mg, gauge_map_config(c, a)), energy(m, c), 1e-12);
      EXPECT_EQ(gauge_map_index(s, a), gauge_map_config(c, a).index());
    }
    EXPECT_EQ(gauge_transform(mg, a), m);
  }
}

TEST(Gauge, GibbsIsPermutedByFlipMask) {
  Rng rng(17);
  const auto m = random_model(rng, 6, false);
  const auto a = GaugeVector::random(6, rng);
  const auto p = enumerate_gibbs(m, 0.7);
  const auto q = enumerate_gibbs(gauge_transform(m, a), 0.7);
  for (StateIndex s = 0; s < 64; ++s) EXPECT_NEAR(q[s ^ a.flip_mask()], p[s], 1e-14);
}

TEST(Gauge, SizeMismatchIsRejected) {
  const IsingModel m({1, 2}, {{1, 2, 1.0}});
  EXPECT_THROW(gauge_transform(m, GaugeVector::identity(3)), ConfigurationMismatch);
  EXPECT_THROW(GaugeVector({1, 2}), InvalidArgument);
}

TEST(Random, DeriveSeedSeparatesStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Random, CdfSamplerSkipsZeroMass) {
  const std::vector<double> p{0.0, 0.5, 0.0, 0.5, 0.0};
  const CdfSampler sampler(p);
  Rng rng(4);
  for (int k = 0; k < 10000; ++k) {
    const auto s = sampler(rng);
    ASSERT_TRUE(s == 1 || s == 3);
  }
}
