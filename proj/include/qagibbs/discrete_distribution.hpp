#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qagibbs/errors.hpp"

namespace qagibbs {

// Largest site count for which 2^n states are materialized.
inline constexpr std::size_t kEnumerationCap = 20;

inline void check_enumerable(std::size_t n_sites, const char* what) {
  if (n_sites > kEnumerationCap) {
    throw CapacityError(std::string(what) + ": too many sites for exact enumeration", n_sites,
                        kEnumerationCap);
  }
}

// Probability vector over the 2^n spin configurations of n sites.
//
// State index convention: bit k of the index is the spin of the k-th site
// (bit 1 is spin +1, bit 0 is spin -1). Every module uses this ordering.
class DiscreteDistribution {
 public:
  static constexpr double kNormTolerance = 1e-9;

  DiscreteDistribution() = default;

  DiscreteDistribution(std::size_t n_sites, std::vector<double> probs)
      : n_sites_(n_sites), probs_(std::move(probs)) {
    check_enumerable(n_sites_, "DiscreteDistribution");
    if (probs_.size() != (std::size_t{1} << n_sites_)) {
      throw DimensionMismatch("DiscreteDistribution: expected 2^" + std::to_string(n_sites_) +
                              " probabilities, got " + std::to_string(probs_.size()));
    }
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InvalidArgument("DiscreteDistribution: probabilities must be finite and >= 0");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
      throw InvalidArgument("DiscreteDistribution: probabilities sum to " + std::to_string(sum));
    }
  }

  static DiscreteDistribution uniform(std::size_t n_sites) {
    check_enumerable(n_sites, "uniform");
    const std::size_t size = std::size_t{1} << n_sites;
    return DiscreteDistribution(n_sites, std::vector<double>(size, 1.0 / static_cast<double>(size)));
  }

  static DiscreteDistribution point_mass(std::size_t n_sites, std::uint32_t state) {
    check_enumerable(n_sites, "point_mass");
    std::vector<double> probs(std::size_t{1} << n_sites, 0.0);
    if (state >= probs.size()) throw InvalidArgument("point_mass: state index out of range");
    probs[state] = 1.0;
    return DiscreteDistribution(n_sites, std::move(probs));
  }

  std::size_t n_sites() const noexcept { return n_sites_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t state) const { return probs_[state]; }

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  std::size_t n_sites_ = 0;
  std::vector<double> probs_{1.0};
};

}  // namespace qagibbs
