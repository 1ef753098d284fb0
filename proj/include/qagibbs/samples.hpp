#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qagibbs/ising.hpp"

namespace qagibbs {

// One call to a sampler: the model is already scaled by alpha_in.
struct SampleRequest {
  IsingModel model;
  std::string anneal_label = "1";  // microseconds: "1", "5", "25", "125", or free-form
  std::size_t num_samples = 1;
  std::uint64_t seed = 0;
};

// Observed configurations, stored as canonical state indices in the
// original (ungauged) frame, plus the gauges used for each batch.
struct SampleSet {
  std::size_t n_sites = 0;
  std::vector<StateIndex> configs;
  std::size_t batch_size = 0;
  std::vector<GaugeVector> gauges;
  std::string backend_id;
  SampleRequest request;

  std::size_t size() const noexcept { return configs.size(); }
  SpinConfig config(std::size_t i) const { return SpinConfig::from_index(configs.at(i), n_sites); }
};

}  // namespace qagibbs
