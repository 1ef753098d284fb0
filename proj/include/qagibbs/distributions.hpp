#pragma once

// Distribution comparison and effective-temperature estimation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qagibbs/discrete_distribution.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/ising.hpp"
#include "qagibbs/parallel.hpp"
#include "qagibbs/random.hpp"
#include "qagibbs/samples.hpp"

namespace qagibbs {

inline void check_same_space(const DiscreteDistribution& mu, const DiscreteDistribution& nu, const char* what) {
  if (mu.n_sites() != nu.n_sites()) {
    throw DimensionMismatch(std::string(what) + ": distributions over " + std::to_string(mu.n_sites()) +
                            " and " + std::to_string(nu.n_sites()) + " sites");
  }
}

// 1/2 sum |mu - nu|, in [0, 1].
inline double total_variation(const DiscreteDistribution& mu, const DiscreteDistribution& nu) {
  check_same_space(mu, nu, "total_variation");
  const auto p = mu.probs();
  const auto q = nu.probs();
  double acc = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) acc += std::abs(p[s] - q[s]);
  return 0.5 * acc;
}

// KL(mu || nu) in nats; +infinity when mu puts mass outside supp(nu).
// Diagnostic only: alpha fitting always uses total variation.
inline double kl_divergence(const DiscreteDistribution& mu, const DiscreteDistribution& nu) {
  check_same_space(mu, nu, "kl_divergence");
  const auto p = mu.probs();
  const auto q = nu.probs();
  double acc = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] == 0.0) continue;
    if (q[s] == 0.0) return std::numeric_limits<double>::infinity();
    acc += p[s] * std::log(p[s] / q[s]);
  }
  return std::max(acc, 0.0);
}

inline DiscreteDistribution empirical_distribution(std::span<const StateIndex> states, std::size_t n_sites) {
  check_enumerable(n_sites, "empirical_distribution");
  if (states.empty()) throw InvalidArgument("empirical_distribution: no samples");
  const std::size_t size = std::size_t{1} << n_sites;
  std::vector<double> counts(size, 0.0);
  for (auto s : states) {
    if (s >= size) throw DimensionMismatch("empirical_distribution: state index out of range");
    counts[s] += 1.0;
  }
  const double m = static_cast<double>(states.size());
  for (auto& c : counts) c /= m;
  return DiscreteDistribution(n_sites, std::move(counts));
}

inline DiscreteDistribution empirical_distribution(const SampleSet& samples, std::size_t n_sites) {
  if (samples.n_sites != n_sites) {
    throw DimensionMismatch("empirical_distribution: sample set has " + std::to_string(samples.n_sites) +
                            " sites, expected " + std::to_string(n_sites));
  }
  return empirical_distribution(samples.configs, n_sites);
}

// i.i.d. draws of canonical state indices.
inline std::vector<StateIndex> draw_states(const DiscreteDistribution& dist, std::size_t count, Rng& rng) {
  const CdfSampler sampler(dist.probs());
  std::vector<StateIndex> out(count);
  for (auto& s : out) s = sampler(rng);
  return out;
}

// ---------------------------------------------------------------------------
// alpha grid

struct AlphaGrid {
  double alpha_max = 0.0;
  std::vector<double> points;
};

// Relative grid in units of 1/800: step 0.0125 on [0, 0.1), 0.025 on
// [0.1, 0.5], 0.1 on (0.5, 1.0]. Band boundaries appear once.
inline std::vector<int> relative_grid_units() {
  std::vector<int> units;
  for (int u = 0; u < 80; u += 10) units.push_back(u);
  for (int u = 80; u <= 400; u += 20) units.push_back(u);
  for (int u = 480; u <= 800; u += 80) units.push_back(u);
  return units;
}

inline AlphaGrid build_alpha_grid(double alpha_max) {
  if (!(alpha_max > 0.0) || !std::isfinite(alpha_max)) {
    throw InvalidArgument("build_alpha_grid: alpha_max must be positive and finite");
  }
  AlphaGrid grid{alpha_max, {}};
  for (int u : relative_grid_units()) {
    grid.points.push_back(u == 800 ? alpha_max : static_cast<double>(u) / 800.0 * alpha_max);
  }
  return grid;
}

// ---------------------------------------------------------------------------
// alpha_out fitting

struct AlphaFit {
  double alpha_out = 0.0;
  double tv_min = 0.0;
  std::size_t grid_index = 0;
  std::vector<double> tv_curve;  // TV at every grid point
};

// Gibbs distributions of one model at every grid point, reusable across
// many fits against the same model.
class GibbsGrid {
 public:
  GibbsGrid(const IsingModel& model, AlphaGrid grid) : grid_(std::move(grid)) {
    if (grid_.points.empty()) throw InvalidArgument("GibbsGrid: empty grid");
    const GibbsFamily family(model);
    dists_.reserve(grid_.points.size());
    for (double a : grid_.points) dists_.push_back(family.at(a));
  }

  const AlphaGrid& grid() const noexcept { return grid_; }
  const DiscreteDistribution& at(std::size_t k) const { return dists_.at(k); }

  // argmin_k TV(nu, Gibbs(alpha_k)); ties go to the smaller alpha.
  AlphaFit fit(const DiscreteDistribution& nu) const {
    AlphaFit out;
    out.tv_curve.reserve(dists_.size());
    out.tv_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dists_.size(); ++k) {
      const double tv = total_variation(nu, dists_[k]);
      out.tv_curve.push_back(tv);
      if (tv < out.tv_min) {
        out.tv_min = tv;
        out.grid_index = k;
      }
    }
    out.alpha_out = grid_.points[out.grid_index];
    return out;
  }

 private:
  AlphaGrid grid_;
  std::vector<DiscreteDistribution> dists_;
};

inline AlphaFit fit_alpha_out(const DiscreteDistribution& nu, const IsingModel& model, const AlphaGrid& grid) {
  return GibbsGrid(model, grid).fit(nu);
}

// ---------------------------------------------------------------------------
// finite-sampling floor

struct FloorEstimate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation across trials
  std::vector<double> per_trial;

  double standard_error() const {
    return per_trial.empty() ? 0.0 : stddev / std::sqrt(static_cast<double>(per_trial.size()));
  }
};

// TV between an M-sample empirical distribution of `target` and `target`
// itself, over independent trials seeded by (seed, trial).
inline FloorEstimate finite_sampling_floor(const DiscreteDistribution& target, std::size_t num_samples,
                                           std::size_t trials, std::uint64_t seed) {
  if (num_samples == 0 || trials == 0) {
    throw InvalidArgument("finite_sampling_floor: need at least one sample and one trial");
  }
  FloorEstimate est;
  est.per_trial.assign(trials, 0.0);
  const CdfSampler sampler(target.probs());
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<StateIndex> states(num_samples);
    for (auto& s : states) s = sampler(rng);
    est.per_trial[t] = total_variation(empirical_distribution(states, target.n_sites()), target);
  });
  est.mean = std::accumulate(est.per_trial.begin(), est.per_trial.end(), 0.0) / static_cast<double>(trials);
  if (trials > 1) {
    double ss = 0.0;
    for (double v : est.per_trial) ss += (v - est.mean) * (v - est.mean);
    est.stddev = std::sqrt(ss / static_cast<double>(trials - 1));
  }
  return est;
}

inline constexpr std::size_t kDefaultFloorTrials = 8;

// Achievable TV floor for M samples of Gibbs(model, alpha_out).
inline double finite_sampling_bound(const IsingModel& model, double alpha_out, std::size_t num_samples,
                                    std::size_t trials = kDefaultFloorTrials, std::uint64_t seed = 0) {
  return finite_sampling_floor(enumerate_gibbs(model, alpha_out), num_samples, trials, seed).mean;
}

}  // namespace qagibbs
