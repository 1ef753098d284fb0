#pragma once

// Sampler backends and the gauge-cycled collection protocol.
//
//   exact     i.i.d. draws from Gibbs(model, 1); alpha is already in the model
//   toy       noise-averaged transverse-field thermal state (<= 10 qubits)
//   emulator  Gibbs(model / alpha_in, beta_eff) with beta_eff from a table
//   remote    JSON wire format over an injectable transport, record/replay

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qagibbs/discrete_distribution.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/io.hpp"
#include "qagibbs/ising.hpp"
#include "qagibbs/quantum.hpp"
#include "qagibbs/random.hpp"
#include "qagibbs/samples.hpp"

namespace qagibbs {

// Gauge a with gauge_transform(from, a) == to, if one exists. Both models
// must list the same sites and coupler pairs in the same order.
inline std::optional<GaugeVector> find_gauge(const IsingModel& from, const IsingModel& to) {
  if (from.sites() != to.sites() || from.couplings().size() != to.couplings().size()) return std::nullopt;
  const std::size_t n = from.num_sites();
  const auto& cf = from.local_couplings();
  const auto& ct = to.local_couplings();
  for (std::size_t e = 0; e < cf.size(); ++e) {
    if (cf[e].a != ct[e].a || cf[e].b != ct[e].b) return std::nullopt;
  }
  const auto& hf = from.local_fields();
  const auto& ht = to.local_fields();

  std::vector<std::vector<std::pair<std::uint32_t, int>>> adj(n);
  for (std::size_t e = 0; e < cf.size(); ++e) {
    if (cf[e].value == 0.0 || ct[e].value == 0.0) continue;
    const int rel = (cf[e].value > 0) == (ct[e].value > 0) ? 1 : -1;
    adj[cf[e].a].push_back({cf[e].b, rel});
    adj[cf[e].b].push_back({cf[e].a, rel});
  }
  std::vector<int> sign(n, 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t r = 0; r < n; ++r) {
    if (sign[r] != 0) continue;
    sign[r] = (hf[r] != 0.0 && ht[r] != 0.0 && (hf[r] > 0) != (ht[r] > 0)) ? -1 : 1;
    stack.push_back(r);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto [v, rel] : adj[u]) {
        if (sign[v] == 0) {
          sign[v] = sign[u] * rel;
          stack.push_back(v);
        }
      }
    }
  }
  for (std::size_t e = 0; e < cf.size(); ++e) {
    if (ct[e].value != sign[cf[e].a] * sign[cf[e].b] * cf[e].value) return std::nullopt;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (ht[k] != sign[k] * hf[k]) return std::nullopt;
  }
  return GaugeVector(std::move(sign));
}

// Distribution cache shared by the enumerating backends. A request whose
// model is a gauge transform of a cached one reuses that entry and maps
// draws through the gauge, which is exact for every backend here.
class DistributionCache {
 public:
  struct Entry {
    IsingModel model;
    DiscreteDistribution dist;
    CdfSampler sampler;
  };

  struct Hit {
    std::shared_ptr<const Entry> entry;
    StateIndex mask = 0;  // XOR applied to draws from entry
  };

  explicit DistributionCache(std::size_t max_entries = 64) : max_entries_(max_entries) {}

  template <class Compute>
  Hit get(const IsingModel& model, Compute&& compute) const {
    {
      std::lock_guard lock(mutex_);
      for (const auto& e : entries_) {
        if (auto a = find_gauge(e->model, model)) return {e, a->flip_mask()};
      }
    }
    DiscreteDistribution dist = compute(model);
    auto entry = std::make_shared<const Entry>(Entry{model, dist, CdfSampler(dist.probs())});
    std::lock_guard lock(mutex_);
    entries_.push_back(entry);
    if (entries_.size() > max_entries_) entries_.pop_front();
    return {entry, 0};
  }

 private:
  std::size_t max_entries_;
  mutable std::mutex mutex_;
  mutable std::deque<std::shared_ptr<const Entry>> entries_;
};

class SamplerBackend {
 public:
  virtual ~SamplerBackend() = default;
  virtual std::string id() const = 0;
  virtual std::size_t capacity() const = 0;  // max number of sites
  virtual SampleSet sample(const SampleRequest& request) const = 0;

 protected:
  void check_request(const SampleRequest& request) const {
    if (request.num_samples == 0) throw InvalidArgument(id() + ": num_samples must be >= 1");
    if (request.model.num_sites() > capacity()) {
      throw CapacityError(id() + ": model too large", request.model.num_sites(), capacity());
    }
  }

  SampleSet draw(const DistributionCache::Hit& hit, const SampleRequest& request) const {
    SampleSet out;
    out.n_sites = request.model.num_sites();
    out.batch_size = request.num_samples;
    out.gauges.push_back(GaugeVector::identity(out.n_sites));
    out.backend_id = id();
    out.request = request;
    out.configs.resize(request.num_samples);
    Rng rng(request.seed);
    for (auto& s : out.configs) s = hit.entry->sampler(rng) ^ hit.mask;
    return out;
  }
};

class ExactBackend final : public SamplerBackend {
 public:
  std::string id() const override { return "exact"; }
  std::size_t capacity() const override { return kEnumerationCap; }

  SampleSet sample(const SampleRequest& request) const override {
    check_request(request);
    return draw(cache_.get(request.model, [](const IsingModel& m) { return enumerate_gibbs(m, 1.0); }), request);
  }

 private:
  DistributionCache cache_;
};

struct ToyModelConfig {
  double gamma = kChainGamma;
  double eta = kChainEta;
  double beta = kChainBeta;
  bool absolute_transverse = false;
};

// QuantumChainSpec for a pre-scaled model: j_in is the largest |J|, |h| and the
// couplings/fields are expressed as multiples of it. Qubit k is site k in
// model order.
inline QuantumChainSpec toy_spec_for(const IsingModel& model, const ToyModelConfig& config) {
  QuantumChainSpec spec;
  spec.n_qubits = model.num_sites();
  spec.j_in = model.max_abs_parameter();
  spec.transverse.assign(spec.n_qubits, config.gamma);
  spec.noise.assign(spec.n_qubits, config.eta);
  spec.beta = config.beta;
  spec.absolute_transverse = config.absolute_transverse;
  if (spec.j_in > 0.0) {
    for (const auto& c : model.local_couplings()) spec.couplings.push_back({c.a, c.b, c.value / spec.j_in});
    if (model.has_nonzero_fields()) {
      for (double h : model.local_fields()) spec.fields.push_back(h / spec.j_in);
    }
  }
  return spec;
}

class ToyModelBackend final : public SamplerBackend {
 public:
  explicit ToyModelBackend(ToyModelConfig config = {}) : config_(config) {}

  std::string id() const override { return "toy"; }
  std::size_t capacity() const override { return kMaxQubits; }
  const ToyModelConfig& config() const noexcept { return config_; }

  DiscreteDistribution distribution(const IsingModel& model) const {
    if (model.num_sites() > capacity()) throw CapacityError("toy: model too large", model.num_sites(), capacity());
    return noise_averaged_distribution(toy_spec_for(model, config_));
  }

  SampleSet sample(const SampleRequest& request) const override {
    check_request(request);
    return draw(cache_.get(request.model, [this](const IsingModel& m) { return distribution(m); }), request);
  }

 private:
  ToyModelConfig config_;
  DistributionCache cache_;
};

// (alpha_in band, anneal label) -> beta_eff. Band b covers
// [band_edges[b], band_edges[b+1]); the last band is open above.
struct EffectiveTemperatureTable {
  std::vector<double> band_edges{0.0, 0.2, 0.3, 0.4};
  std::vector<std::string> labels{"1", "5", "25", "125"};
  std::vector<std::vector<double>> beta;  // [band][label]

  static EffectiveTemperatureTable defaults() {
    EffectiveTemperatureTable t;
    for (std::size_t b = 0; b < t.band_edges.size(); ++b) {
      std::vector<double> row;
      for (std::size_t k = 0; k < t.labels.size(); ++k) {
        row.push_back(1.85 + 3.31 * static_cast<double>(b + k) / 6.0);
      }
      t.beta.push_back(std::move(row));
    }
    return t;
  }

  void validate() const {
    if (band_edges.empty() || labels.empty()) throw InvalidArgument("temperature table: empty bands or labels");
    if (!std::is_sorted(band_edges.begin(), band_edges.end()) || band_edges.front() != 0.0) {
      throw InvalidArgument("temperature table: band edges must start at 0 and increase");
    }
    if (beta.size() != band_edges.size()) throw InvalidArgument("temperature table: one beta row per band");
    for (const auto& row : beta) {
      if (row.size() != labels.size()) throw InvalidArgument("temperature table: one beta per label");
      for (double v : row) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("temperature table: beta_eff must be > 0");
      }
    }
  }

  std::size_t band_of(double alpha_in) const {
    if (!(alpha_in >= 0.0)) throw InvalidArgument("temperature table: alpha_in must be >= 0");
    auto it = std::upper_bound(band_edges.begin(), band_edges.end(), alpha_in);
    return static_cast<std::size_t>(std::distance(band_edges.begin(), it)) - 1;
  }

  std::size_t label_index(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw UnknownLabelError("unknown anneal label '" + label + "'");
    return static_cast<std::size_t>(std::distance(labels.begin(), it));
  }

  double lookup(double alpha_in, const std::string& label) const {
    return beta[band_of(alpha_in)][label_index(label)];
  }
};

inline Json temperature_table_to_json(const EffectiveTemperatureTable& t) {
  return Json{{"band_edges", t.band_edges}, {"labels", t.labels}, {"beta", t.beta}};
}

inline EffectiveTemperatureTable temperature_table_from_json(const Json& j) {
  EffectiveTemperatureTable t;
  try {
    t.band_edges = j.at("band_edges").get<std::vector<double>>();
    t.labels = j.at("labels").get<std::vector<std::string>>();
    t.beta = j.at("beta").get<std::vector<std::vector<double>>>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("temperature table JSON: ") + e.what());
  }
  t.validate();
  return t;
}

class EmulatorBackend final : public SamplerBackend {
 public:
  explicit EmulatorBackend(EffectiveTemperatureTable table = EffectiveTemperatureTable::defaults())
      : table_(std::move(table)), caches_(table_.labels.size()) {
    table_.validate();
  }

  std::string id() const override { return "emulator"; }
  std::size_t capacity() const override { return kEnumerationCap; }
  const EffectiveTemperatureTable& table() const noexcept { return table_; }

  // beta_eff that applies to a request; 0 for an all-zero model.
  double effective_beta(const SampleRequest& request) const {
    const double alpha_in = request.model.max_abs_parameter();
    const double beta = table_.lookup(alpha_in, request.anneal_label);
    return alpha_in == 0.0 ? 0.0 : beta;
  }

  SampleSet sample(const SampleRequest& request) const override {
    check_request(request);
    const double alpha_in = request.model.max_abs_parameter();
    const double beta = effective_beta(request);
    auto& cache = caches_[table_.label_index(request.anneal_label)];
    auto hit = cache.get(request.model, [&](const IsingModel& m) {
      if (alpha_in == 0.0) return DiscreteDistribution::uniform(m.num_sites());
      return enumerate_gibbs(m, beta / alpha_in);
    });
    return draw(hit, request);
  }

 private:
  EffectiveTemperatureTable table_;
  mutable std::deque<DistributionCache> caches_;
};

// ---------------------------------------------------------------------------
// remote

using Transport = std::function<std::string(const std::string&)>;

enum class RemoteMode { Replay, Record, Live };

struct RemoteConfig {
  RemoteMode mode = RemoteMode::Replay;
  std::filesystem::path fixture_dir = "fixtures";
  Transport transport;  // required for Record and Live
  std::size_t capacity = 2048;
};

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

inline Json wire_request(const SampleRequest& request) {
  Json j{{"model", model_to_json(request.model)}, {"num_reads", request.num_samples}, {"seed", request.seed}};
  // numeric labels go out as numbers, free-form ones as strings
  char* end = nullptr;
  const double t = std::strtod(request.anneal_label.c_str(), &end);
  if (!request.anneal_label.empty() && end && *end == '\0') {
    j["anneal_time_us"] = t;
  } else {
    j["anneal_time_us"] = request.anneal_label;
  }
  return j;
}

inline std::string request_hash(const SampleRequest& request) { return fnv1a_hex(wire_request(request).dump()); }

inline std::vector<StateIndex> decode_wire_response(const std::string& body, const SampleRequest& request) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw DecodeError(std::string("remote response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("samples") || !j["samples"].is_array()) {
    throw DecodeError("remote response lacks a samples array");
  }
  const auto& rows = j["samples"];
  if (rows.size() != request.num_samples) {
    throw DecodeError("remote response has " + std::to_string(rows.size()) + " samples, expected " +
                      std::to_string(request.num_samples));
  }
  std::vector<StateIndex> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(index_of_spins(row, request.model.num_sites()));
  return out;
}

class RemoteBackend final : public SamplerBackend {
 public:
  explicit RemoteBackend(RemoteConfig config) : config_(std::move(config)) {}

  std::string id() const override { return "remote"; }
  std::size_t capacity() const override { return config_.capacity; }
  const RemoteConfig& config() const noexcept { return config_; }

  std::filesystem::path fixture_path(const SampleRequest& request) const {
    return config_.fixture_dir / (request_hash(request) + ".json");
  }

  SampleSet sample(const SampleRequest& request) const override {
    check_request(request);
    std::string body;
    if (config_.mode == RemoteMode::Replay) {
      const auto path = fixture_path(request);
      std::ifstream in(path, std::ios::binary);
      if (!in) throw FixtureMissError("no fixture for request " + path.filename().string());
      body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else {
      if (!config_.transport) throw TransportError("remote: no transport configured");
      body = config_.transport(wire_request(request).dump());
    }
    SampleSet out;
    out.configs = decode_wire_response(body, request);
    if (config_.mode == RemoteMode::Record) write_text_file(fixture_path(request), body);
    out.n_sites = request.model.num_sites();
    out.batch_size = request.num_samples;
    out.gauges.push_back(GaugeVector::identity(out.n_sites));
    out.backend_id = id();
    out.request = request;
    return out;
  }

 private:
  RemoteConfig config_;
};

// Wire-format server side for tests and local rehearsal: answers a request
// body by sampling another backend.
inline std::string serve_wire_request(const SamplerBackend& backend, const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw DecodeError(std::string("request is not JSON: ") + e.what());
  }
  SampleRequest request;
  request.model = model_from_json(j.at("model"));
  request.num_samples = j.at("num_reads").get<std::size_t>();
  request.seed = j.value("seed", std::uint64_t{0});
  const auto& t = j.at("anneal_time_us");
  if (t.is_string()) {
    request.anneal_label = t.get<std::string>();
  } else {
    std::ostringstream label;
    label << t.get<double>();
    request.anneal_label = label.str();
  }
  const auto set = backend.sample(request);
  Json samples = Json::array();
  for (auto s : set.configs) samples.push_back(spins_of(s, set.n_sites));
  return Json{{"samples", samples}, {"timing", {{"backend", backend.id()}}}}.dump();
}

// ---------------------------------------------------------------------------
// gauge-cycled collection

enum class GaugePolicy { Random, Identity };

struct CollectOptions {
  std::string anneal_label = "1";
  std::size_t total = 1000;
  std::size_t batch = 100;
  std::uint64_t seed = 0;
  GaugePolicy policy = GaugePolicy::Random;
};

// Gauges come from their own stream so that batch b always sees seed
// derive_seed(seed, b) whatever the policy.
inline constexpr std::uint64_t kGaugeStream = 0x6761756765ULL;

inline SampleSet collect_with_gauges(const SamplerBackend& backend, const IsingModel& model,
                                     const CollectOptions& options) {
  if (options.total == 0 || options.batch == 0) {
    throw InvalidArgument("collect_with_gauges: total and batch must be >= 1");
  }
  const std::size_t n = model.num_sites();
  SampleSet out;
  out.n_sites = n;
  out.batch_size = options.batch;
  out.backend_id = backend.id();
  out.request = {model, options.anneal_label, options.total, options.seed};
  out.configs.reserve(options.total);
  Rng gauge_rng(derive_seed(options.seed, kGaugeStream));
  for (std::size_t b = 0; out.configs.size() < options.total; ++b) {
    const auto a = options.policy == GaugePolicy::Random ? GaugeVector::random(n, gauge_rng)
                                                         : GaugeVector::identity(n);
    const std::size_t count = std::min(options.batch, options.total - out.configs.size());
    const SampleRequest request{gauge_transform(model, a), options.anneal_label, count, derive_seed(options.seed, b)};
    const auto batch = backend.sample(request);
    const StateIndex mask = a.flip_mask();
    for (auto s : batch.configs) out.configs.push_back(s ^ mask);
    out.gauges.push_back(a);
  }
  return out;
}

}  // namespace qagibbs
