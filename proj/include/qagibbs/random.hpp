#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qagibbs {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the `index`-th child stream of `seed` (trials, batches, workers).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix_seed(mix_seed(seed) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) with 53 random bits. Unlike
// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int random_sign(Rng& rng) noexcept { return (rng() >> 63) ? 1 : -1; }

// Inverse-CDF sampler over a finite probability vector.
class CdfSampler {
 public:
  explicit CdfSampler(std::span<const double> probs) : cdf_(probs.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      cdf_[i] = acc;
    }
    total_ = acc;
  }

  std::uint32_t operator()(Rng& rng) const {
    const double u = uniform01(rng) * total_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) {
      // u rounded up to the total: take the last state with nonzero mass.
      std::size_t i = cdf_.size() - 1;
      while (i > 0 && cdf_[i] == cdf_[i - 1]) --i;
      return static_cast<std::uint32_t>(i);
    }
    return static_cast<std::uint32_t>(it - cdf_.begin());
  }

  std::size_t size() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
  double total_ = 0.0;
};

}  // namespace qagibbs
