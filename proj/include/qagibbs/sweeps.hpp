#pragma once

// Experiment drivers: alpha_in x anneal-label TV sweeps and the three-spin
// chain reconstruction sweep, plus their CSV / manifest writers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qagibbs/backends.hpp"
#include "qagibbs/distributions.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/io.hpp"
#include "qagibbs/ising.hpp"
#include "qagibbs/parallel.hpp"
#include "qagibbs/quantum.hpp"
#include "qagibbs/screening.hpp"

namespace qagibbs {

inline constexpr const char* kVersion = "0.1.0";

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// `<dir>/<stem>.csv` -> `<dir>/<stem>.manifest.json`
inline std::filesystem::path manifest_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".manifest.json");
  return p;
}

inline void write_csv_with_manifest(const std::filesystem::path& csv, const std::string& text, Json manifest) {
  write_text_file(csv, text);
  manifest["csv"] = csv.filename().string();
  manifest["version"] = kVersion;
  write_text_file(manifest_path_for(csv), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// TV sweep

struct TvSweepConfig {
  IsingModel model;                 // unscaled instance
  std::vector<double> alpha_in;     // empty: build_alpha_grid(1.0)
  std::vector<std::string> labels{"1", "5", "25", "125"};
  double alpha_max = 10.0;
  std::size_t samples = 1000000;
  std::size_t batch = 100;
  std::uint64_t seed = 0;
  std::size_t floor_trials = kDefaultFloorTrials;
  GaugePolicy policy = GaugePolicy::Random;
};

struct TvSweepRow {
  double alpha_in = 0.0;
  std::string anneal_label;
  double tv = 0.0;
  double alpha_out = 0.0;
  double tv_floor = 0.0;
};

inline constexpr std::uint64_t kFloorStream = 0x666c6f6f72ULL;

// Rows are ordered alpha_in-major, label-minor, regardless of completion order.
inline std::vector<TvSweepRow> run_tv_sweep(const SamplerBackend& backend, TvSweepConfig config) {
  if (config.alpha_in.empty()) config.alpha_in = build_alpha_grid(1.0).points;
  if (config.labels.empty()) throw InvalidArgument("tv-sweep: no anneal labels");
  if (config.samples == 0) throw InvalidArgument("tv-sweep: samples must be >= 1");
  for (double a : config.alpha_in) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("tv-sweep: alpha_in values must lie in [0, 1]");
  }
  check_enumerable(config.model.num_sites(), "tv-sweep");
  if (config.model.num_sites() > backend.capacity()) {
    throw CapacityError("tv-sweep: instance exceeds " + backend.id() + " backend capacity",
                        config.model.num_sites(), backend.capacity());
  }
  const GibbsGrid gibbs(config.model, build_alpha_grid(config.alpha_max));

  std::mutex floor_mutex;
  std::map<std::size_t, double> floors;
  auto floor_at = [&](std::size_t k) {
    {
      std::lock_guard lock(floor_mutex);
      if (auto it = floors.find(k); it != floors.end()) return it->second;
    }
    const double f = finite_sampling_floor(gibbs.at(k), config.samples, config.floor_trials,
                                           derive_seed(config.seed ^ kFloorStream, k))
                         .mean;
    std::lock_guard lock(floor_mutex);
    floors.emplace(k, f);
    return f;
  };

  const std::size_t n_labels = config.labels.size();
  std::vector<TvSweepRow> rows(config.alpha_in.size() * n_labels);
  parallel_for(rows.size(), [&](std::size_t cell) {
    const double a = config.alpha_in[cell / n_labels];
    const auto& label = config.labels[cell % n_labels];
    CollectOptions opt;
    opt.anneal_label = label;
    opt.total = config.samples;
    opt.batch = config.batch;
    opt.seed = derive_seed(config.seed, cell);
    opt.policy = config.policy;
    const auto set = collect_with_gauges(backend, config.model.scaled(a), opt);
    const auto fit = gibbs.fit(empirical_distribution(set, config.model.num_sites()));
    rows[cell] = {a, label, fit.tv_min, fit.alpha_out, floor_at(fit.grid_index)};
  });
  return rows;
}

inline std::string tv_sweep_csv(const std::vector<TvSweepRow>& rows) {
  std::string out = "alpha_in,anneal_label,tv,alpha_out,tv_floor\n";
  for (const auto& r : rows) {
    out += format_number(r.alpha_in) + "," + r.anneal_label + "," + format_number(r.tv) + "," +
           format_number(r.alpha_out) + "," + format_number(r.tv_floor) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// three-spin chain sweep

enum class ChainSource { Toy, Bs, Backend };

struct ChainSweepConfig {
  ChainSource source = ChainSource::Toy;
  std::vector<double> j_in;  // empty: build_alpha_grid(1.0)
  double beta = kChainBeta;
  double gamma = kChainGamma;
  double eta = kChainEta;
  double chi = 0.05;
  // Backend source only.
  const SamplerBackend* backend = nullptr;
  std::string anneal_label = "1";
  std::size_t samples = 1000000;
  std::size_t batch = 100;
  std::uint64_t seed = 0;
  ScreeningOptions screening;
};

struct ChainSweepRow {
  double j_in = 0.0;
  double j12 = 0.0;
  double j23 = 0.0;
  double j13 = 0.0;
  bool converged = true;
};

inline IsingModel chain3_model(double j_in) { return IsingModel({1, 2, 3}, {{1, 2, j_in}, {2, 3, j_in}}); }

// Distribution the chain reconstruction sees at one J_in, exact sources only.
inline DiscreteDistribution chain_distribution(const ChainSweepConfig& config, double j_in) {
  switch (config.source) {
    case ChainSource::Toy:
      return noise_averaged_distribution(chain_spec(3, j_in, config.beta, config.gamma, config.eta));
    case ChainSource::Bs:
      return bs_distribution(j_in, config.chi, config.beta);
    case ChainSource::Backend:
      break;
  }
  throw InvalidArgument("chain_distribution: backend source has no exact distribution");
}

inline std::vector<ChainSweepRow> run_chain_sweep(ChainSweepConfig config) {
  if (config.j_in.empty()) config.j_in = build_alpha_grid(1.0).points;
  if (config.source == ChainSource::Backend && config.backend == nullptr) {
    throw InvalidArgument("chain sweep: backend source needs a backend");
  }
  const std::vector<SiteId> sites{1, 2, 3};
  std::vector<ChainSweepRow> rows(config.j_in.size());
  parallel_for(rows.size(), [&](std::size_t k) {
    const double j = config.j_in[k];
    ReconstructionResult r;
    if (config.source == ChainSource::Backend) {
      CollectOptions opt;
      opt.anneal_label = config.anneal_label;
      opt.total = config.samples;
      opt.batch = config.batch;
      opt.seed = derive_seed(config.seed, k);
      r = reconstruct(collect_with_gauges(*config.backend, chain3_model(j), opt), sites, std::nullopt,
                      config.screening);
    } else {
      r = reconstruct(chain_distribution(config, j), sites, std::nullopt, config.screening);
    }
    rows[k] = {j, r.coupling(1, 2), r.coupling(2, 3), r.coupling(1, 3), r.converged};
  });
  return rows;
}

inline std::string chain_sweep_csv(const std::vector<ChainSweepRow>& rows) {
  std::string out = "j_in,j12_rec,j23_rec,j13_rec\n";
  for (const auto& r : rows) {
    out += format_number(r.j_in) + "," + format_number(r.j12) + "," + format_number(r.j23) + "," +
           format_number(r.j13) + "\n";
  }
  return out;
}

// Where the series changes sign from negative to positive, by linear
// interpolation between adjacent points. Values within `eps` of zero are
// treated as zero and skipped.
inline std::optional<double> zero_crossing(const std::vector<double>& x, const std::vector<double>& y,
                                           double eps = 1e-9) {
  if (x.size() != y.size()) throw DimensionMismatch("zero_crossing: x and y lengths differ");
  std::optional<std::size_t> prev;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (std::abs(y[k]) <= eps) continue;
    if (prev && y[*prev] < 0.0 && y[k] > 0.0) {
      const double x0 = x[*prev], x1 = x[k], y0 = y[*prev], y1 = y[k];
      return x0 + (x1 - x0) * (-y0) / (y1 - y0);
    }
    prev = k;
  }
  return std::nullopt;
}

}  // namespace qagibbs
