#pragma once

// Classical Ising models over named sites: energies, exact enumeration,
// ground-state analysis and gauge (spin-reversal) transforms.
//
//   H(s) = - sum_{(i,j)} J_ij s_i s_j - sum_i h_i s_i,   s_i in {-1, +1}
//   p(s) = exp(-alpha H(s)) / Z

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qagibbs/discrete_distribution.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/random.hpp"

namespace qagibbs {

using SiteId = int;
using StateIndex = std::uint32_t;

struct Coupling {
  SiteId i = 0;
  SiteId j = 0;
  double value = 0.0;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

struct Field {
  SiteId site = 0;
  double value = 0.0;

  friend bool operator==(const Field&, const Field&) = default;
};

// Sparse coupling/field record. Couplings and fields keep the order (and
// pair orientation) they were given in so that instance files round-trip.
class IsingModel {
 public:
  IsingModel() = default;

  IsingModel(std::vector<SiteId> sites, std::vector<Coupling> couplings,
             std::vector<Field> fields = {})
      : sites_(std::move(sites)), couplings_(std::move(couplings)), fields_(std::move(fields)) {
    for (std::size_t k = 0; k < sites_.size(); ++k) {
      if (!index_.emplace(sites_[k], static_cast<std::uint32_t>(k)).second) {
        throw InvalidArgument("IsingModel: duplicate site " + std::to_string(sites_[k]));
      }
    }
    local_fields_.assign(sites_.size(), 0.0);
    std::set<std::pair<SiteId, SiteId>> seen;
    for (const auto& c : couplings_) {
      if (c.i == c.j) {
        throw InvalidArgument("IsingModel: self-coupling on site " + std::to_string(c.i));
      }
      if (!std::isfinite(c.value)) throw InvalidArgument("IsingModel: non-finite coupling");
      if (!seen.emplace(std::min(c.i, c.j), std::max(c.i, c.j)).second) {
        throw InvalidArgument("IsingModel: duplicate coupling (" + std::to_string(c.i) + ", " +
                              std::to_string(c.j) + ")");
      }
      local_couplings_.push_back({require_index(c.i), require_index(c.j), c.value});
    }
    std::set<SiteId> seen_fields;
    for (const auto& f : fields_) {
      if (!std::isfinite(f.value)) throw InvalidArgument("IsingModel: non-finite field");
      if (!seen_fields.insert(f.site).second) {
        throw InvalidArgument("IsingModel: duplicate field on site " + std::to_string(f.site));
      }
      local_fields_[require_index(f.site)] = f.value;
    }
  }

  struct LocalCoupling {
    std::uint32_t a;
    std::uint32_t b;
    double value;
  };

  const std::vector<SiteId>& sites() const noexcept { return sites_; }
  const std::vector<Coupling>& couplings() const noexcept { return couplings_; }
  const std::vector<Field>& fields() const noexcept { return fields_; }
  std::size_t num_sites() const noexcept { return sites_.size(); }

  // Couplings in local (site-order) indices, same order as couplings().
  const std::vector<LocalCoupling>& local_couplings() const noexcept { return local_couplings_; }
  // Dense field vector in site order (0 where no field is given).
  const std::vector<double>& local_fields() const noexcept { return local_fields_; }

  bool has_site(SiteId site) const { return index_.contains(site); }

  std::uint32_t index_of(SiteId site) const {
    auto it = index_.find(site);
    if (it == index_.end()) {
      throw ConfigurationMismatch("site " + std::to_string(site) + " is not part of the model");
    }
    return it->second;
  }

  double coupling(SiteId i, SiteId j) const {
    for (const auto& c : couplings_) {
      if ((c.i == i && c.j == j) || (c.i == j && c.j == i)) return c.value;
    }
    return 0.0;
  }

  double field(SiteId site) const { return local_fields_[index_of(site)]; }

  double max_abs_parameter() const noexcept {
    double m = 0.0;
    for (const auto& c : couplings_) m = std::max(m, std::abs(c.value));
    for (const auto& f : fields_) m = std::max(m, std::abs(f.value));
    return m;
  }

  bool has_nonzero_fields() const noexcept {
    return std::any_of(fields_.begin(), fields_.end(), [](const Field& f) { return f.value != 0.0; });
  }

  // Every parameter multiplied by `factor` (alpha_in scaling).
  IsingModel scaled(double factor) const {
    auto couplings = couplings_;
    auto fields = fields_;
    for (auto& c : couplings) c.value *= factor;
    for (auto& f : fields) f.value *= factor;
    return IsingModel(sites_, std::move(couplings), std::move(fields));
  }

  friend bool operator==(const IsingModel& a, const IsingModel& b) {
    return a.sites_ == b.sites_ && a.couplings_ == b.couplings_ && a.fields_ == b.fields_;
  }

 private:
  std::uint32_t require_index(SiteId site) const {
    auto it = index_.find(site);
    if (it == index_.end()) {
      throw InvalidArgument("IsingModel: site " + std::to_string(site) +
                            " referenced but not listed in sites");
    }
    return it->second;
  }

  std::vector<SiteId> sites_;
  std::vector<Coupling> couplings_;
  std::vector<Field> fields_;
  std::unordered_map<SiteId, std::uint32_t> index_;
  std::vector<LocalCoupling> local_couplings_;
  std::vector<double> local_fields_;
};

// Spins in site order, each -1 or +1.
class SpinConfig {
 public:
  SpinConfig() = default;

  explicit SpinConfig(std::vector<int> spins) {
    spins_.reserve(spins.size());
    for (int s : spins) {
      if (s != 1 && s != -1) throw InvalidArgument("SpinConfig: spins must be -1 or +1");
      spins_.push_back(static_cast<std::int8_t>(s));
    }
  }

  static SpinConfig from_index(StateIndex index, std::size_t n_sites) {
    SpinConfig c;
    c.spins_.resize(n_sites);
    for (std::size_t k = 0; k < n_sites; ++k) c.spins_[k] = ((index >> k) & 1U) ? 1 : -1;
    return c;
  }

  StateIndex index() const {
    if (spins_.size() > 32) throw CapacityError("SpinConfig::index", spins_.size(), 32);
    StateIndex idx = 0;
    for (std::size_t k = 0; k < spins_.size(); ++k) {
      if (spins_[k] > 0) idx |= StateIndex{1} << k;
    }
    return idx;
  }

  std::size_t size() const noexcept { return spins_.size(); }
  int operator[](std::size_t k) const { return spins_[k]; }
  std::vector<int> values() const { return {spins_.begin(), spins_.end()}; }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::vector<std::int8_t> spins_;
};

// Spin-reversal signs a_i in site order.
class GaugeVector {
 public:
  GaugeVector() = default;

  explicit GaugeVector(std::vector<int> signs) {
    signs_.reserve(signs.size());
    for (int s : signs) {
      if (s != 1 && s != -1) throw InvalidArgument("GaugeVector: signs must be -1 or +1");
      signs_.push_back(static_cast<std::int8_t>(s));
    }
  }

  static GaugeVector identity(std::size_t n_sites) { return GaugeVector(std::vector<int>(n_sites, 1)); }

  static GaugeVector random(std::size_t n_sites, Rng& rng) {
    std::vector<int> signs(n_sites);
    for (auto& s : signs) s = random_sign(rng);
    return GaugeVector(std::move(signs));
  }

  std::size_t size() const noexcept { return signs_.size(); }
  int operator[](std::size_t k) const { return signs_[k]; }
  std::vector<int> values() const { return {signs_.begin(), signs_.end()}; }

  // Bit k set where a_k = -1; gauge-mapping a state index is an XOR with it.
  StateIndex flip_mask() const {
    StateIndex mask = 0;
    for (std::size_t k = 0; k < signs_.size(); ++k) {
      if (signs_[k] < 0) mask |= StateIndex{1} << k;
    }
    return mask;
  }

  friend bool operator==(const GaugeVector&, const GaugeVector&) = default;

 private:
  std::vector<std::int8_t> signs_;
};

inline double energy(const IsingModel& model, const SpinConfig& config) {
  if (config.size() != model.num_sites()) {
    throw ConfigurationMismatch("energy: configuration has " + std::to_string(config.size()) +
                                " spins, model has " + std::to_string(model.num_sites()) + " sites");
  }
  double e = 0.0;
  for (const auto& c : model.local_couplings()) e -= c.value * config[c.a] * config[c.b];
  const auto& h = model.local_fields();
  for (std::size_t k = 0; k < h.size(); ++k) e -= h[k] * config[k];
  return e;
}

// Energy of the configuration with canonical index `state`; same term order
// (and rounding) as energy(model, SpinConfig).
inline double energy_of_index(const IsingModel& model, StateIndex state) {
  double e = 0.0;
  for (const auto& c : model.local_couplings()) {
    const bool aligned = (((state >> c.a) ^ (state >> c.b)) & 1U) == 0;
    e -= aligned ? c.value : -c.value;
  }
  const auto& h = model.local_fields();
  for (std::size_t k = 0; k < h.size(); ++k) e -= ((state >> k) & 1U) ? h[k] : -h[k];
  return e;
}

namespace detail {

// c = max |parameter| when every parameter is an integer multiple of c
// (e.g. +-1 catalog values times alpha_in), otherwise 0. A zero model gives 1.
inline double integer_unit(const IsingModel& model) {
  const double c = model.max_abs_parameter();
  if (c == 0.0) return 1.0;
  auto ok = [c](double v) {
    const double r = v / c;
    const double n = std::nearbyint(r);
    return r == n && n * c == v;
  };
  for (const auto& cp : model.couplings()) {
    if (!ok(cp.value)) return 0.0;
  }
  for (const auto& f : model.fields()) {
    if (!ok(f.value)) return 0.0;
  }
  return c;
}

// Energies of all states in units of `unit`, via Gray-code single-flip
// updates in exact integer arithmetic. Requires integer_unit(model) == unit.
inline std::vector<std::int64_t> integer_energy_table(const IsingModel& model, double unit) {
  const std::size_t n = model.num_sites();
  const std::size_t size = std::size_t{1} << n;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> adjacency(n);
  std::int64_t e = 0;
  for (const auto& c : model.local_couplings()) {
    const auto j = static_cast<std::int64_t>(std::nearbyint(c.value / unit));
    adjacency[c.a].emplace_back(c.b, j);
    adjacency[c.b].emplace_back(c.a, j);
    e -= j;  // all spins -1: s_a s_b = +1
  }
  std::vector<std::int64_t> h(n);
  for (std::size_t k = 0; k < n; ++k) {
    h[k] = static_cast<std::int64_t>(std::nearbyint(model.local_fields()[k] / unit));
    e += h[k];
  }
  std::vector<int> spin(n, -1);
  std::vector<std::int64_t> table(size);
  table[0] = e;
  StateIndex gray = 0;
  for (std::size_t step = 1; step < size; ++step) {
    const auto k = static_cast<std::uint32_t>(std::countr_zero(step));
    std::int64_t local = h[k];
    for (const auto& [nb, j] : adjacency[k]) local += j * spin[nb];
    e += 2 * spin[k] * local;
    spin[k] = -spin[k];
    gray ^= StateIndex{1} << k;
    table[gray] = e;
  }
  return table;
}

}  // namespace detail

// Energy of every state, indexed canonically.
inline std::vector<double> energy_table(const IsingModel& model) {
  check_enumerable(model.num_sites(), "energy_table");
  const std::size_t size = std::size_t{1} << model.num_sites();
  std::vector<double> table(size);
  if (const double unit = detail::integer_unit(model); unit > 0.0) {
    const auto ints = detail::integer_energy_table(model, unit);
    for (std::size_t s = 0; s < size; ++s) table[s] = static_cast<double>(ints[s]) * unit;
  } else {
    for (std::size_t s = 0; s < size; ++s) table[s] = energy_of_index(model, static_cast<StateIndex>(s));
  }
  return table;
}

// Normalized exp(-alpha * E) with the largest exponent shifted to zero.
inline DiscreteDistribution gibbs_from_energies(std::span<const double> energies, std::size_t n_sites,
                                                double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("gibbs: alpha must be finite and >= 0");
  }
  std::vector<double> w(energies.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < w.size(); ++s) {
    w[s] = -alpha * energies[s];
    top = std::max(top, w[s]);
  }
  double z = 0.0;
  for (auto& x : w) {
    x = std::exp(x - top);
    z += x;
  }
  for (auto& x : w) x /= z;
  return DiscreteDistribution(n_sites, std::move(w));
}

// Gibbs distributions of one model at many inverse temperatures, sharing the
// energy table.
class GibbsFamily {
 public:
  explicit GibbsFamily(const IsingModel& model)
      : n_sites_(model.num_sites()), energies_(energy_table(model)) {}

  DiscreteDistribution at(double alpha) const { return gibbs_from_energies(energies_, n_sites_, alpha); }

  std::size_t n_sites() const noexcept { return n_sites_; }
  std::span<const double> energies() const noexcept { return energies_; }

 private:
  std::size_t n_sites_;
  std::vector<double> energies_;
};

inline DiscreteDistribution enumerate_gibbs(const IsingModel& model, double alpha) {
  check_enumerable(model.num_sites(), "enumerate_gibbs");
  return GibbsFamily(model).at(alpha);
}

struct GroundStates {
  double min_energy = 0.0;
  std::size_t degeneracy = 0;
  std::vector<StateIndex> indices;
  std::vector<SpinConfig> states;
};

// Minimum energy and all minimizers. Integer-multiple models (the catalog,
// possibly scaled) are compared exactly; others with a 1e-9 tie tolerance.
inline GroundStates ground_states(const IsingModel& model) {
  check_enumerable(model.num_sites(), "ground_states");
  const std::size_t n = model.num_sites();
  const std::size_t size = std::size_t{1} << n;
  GroundStates out;
  if (const double unit = detail::integer_unit(model); unit > 0.0) {
    const auto table = detail::integer_energy_table(model, unit);
    const std::int64_t best = *std::min_element(table.begin(), table.end());
    for (std::size_t s = 0; s < size; ++s) {
      if (table[s] == best) out.indices.push_back(static_cast<StateIndex>(s));
    }
    out.min_energy = static_cast<double>(best) * unit;
  } else {
    constexpr double kTieTolerance = 1e-9;
    std::vector<double> table(size);
    for (std::size_t s = 0; s < size; ++s) table[s] = energy_of_index(model, static_cast<StateIndex>(s));
    const double best = *std::min_element(table.begin(), table.end());
    for (std::size_t s = 0; s < size; ++s) {
      if (table[s] <= best + kTieTolerance) out.indices.push_back(static_cast<StateIndex>(s));
    }
    out.min_energy = best;
  }
  out.degeneracy = out.indices.size();
  out.states.reserve(out.indices.size());
  for (auto idx : out.indices) out.states.push_back(SpinConfig::from_index(idx, n));
  return out;
}

inline void check_gauge(const IsingModel& model, const GaugeVector& a) {
  if (a.size() != model.num_sites()) {
    throw ConfigurationMismatch("gauge vector has " + std::to_string(a.size()) + " signs, model has " +
                                std::to_string(model.num_sites()) + " sites");
  }
}

// h_i -> a_i h_i, J_ij -> a_i a_j J_ij. An involution.
inline IsingModel gauge_transform(const IsingModel& model, const GaugeVector& a) {
  check_gauge(model, a);
  auto couplings = model.couplings();
  auto fields = model.fields();
  for (auto& c : couplings) {
    if (a[model.index_of(c.i)] * a[model.index_of(c.j)] < 0) c.value = -c.value;
  }
  for (auto& f : fields) {
    if (a[model.index_of(f.site)] < 0) f.value = -f.value;
  }
  return IsingModel(model.sites(), std::move(couplings), std::move(fields));
}

// s_i -> a_i s_i.
inline SpinConfig gauge_map_config(const SpinConfig& config, const GaugeVector& a) {
  if (config.size() != a.size()) {
    throw ConfigurationMismatch("gauge_map_config: configuration and gauge sizes differ");
  }
  std::vector<int> spins(config.size());
  for (std::size_t k = 0; k < spins.size(); ++k) spins[k] = a[k] * config[k];
  return SpinConfig(std::move(spins));
}

inline StateIndex gauge_map_index(StateIndex state, const GaugeVector& a) { return state ^ a.flip_mask(); }

}  // namespace qagibbs
