// qagibbs command-line driver.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qagibbs/backends.hpp"
#include "qagibbs/distributions.hpp"
#include "qagibbs/instances.hpp"
#include "qagibbs/io.hpp"
#include "qagibbs/remote_http.hpp"
#include "qagibbs/sweeps.hpp"

namespace fs = std::filesystem;
using namespace qagibbs;

namespace {

// JSON config files. Top-level keys naming a subcommand hold that
// subcommand's options; any other key applies to the subcommand being run.
class JsonConfig : public CLI::Config {
 public:
  std::set<std::string> sections;
  std::string active;

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConfigError("writing JSON config is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw CLI::ConfigError(std::string("config JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config JSON must be an object");
    std::vector<CLI::ConfigItem> items;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (sections.contains(it.key()) && it->is_object()) {
        for (auto sub = it->begin(); sub != it->end(); ++sub) items.push_back(item({it.key()}, sub.key(), *sub));
      } else if (!active.empty()) {
        items.push_back(item({active}, it.key(), *it));
      } else {
        items.push_back(item({}, it.key(), *it));
      }
    }
    return items;
  }

 private:
  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config values must be scalars or arrays of scalars");
  }

  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const Json& v) {
    CLI::ConfigItem out;
    out.parents = std::move(parents);
    out.name = name;
    if (v.is_array()) {
      for (const auto& e : v) out.inputs.push_back(scalar(e));
    } else {
      out.inputs.push_back(scalar(v));
    }
    return out;
  }
};

struct InstanceArgs {
  std::string name;
  std::string file;
  bool dwave = false;
};

struct BackendArgs {
  std::string kind = "emulator";
  std::string temperature_table;
  std::string fixtures = "fixtures";
  std::string remote_mode = "replay";
  double gamma = kChainGamma;
  double eta = kChainEta;
  double beta = kChainBeta;
  bool absolute_transverse = false;
};

struct Loaded {
  std::string label;
  IsingModel model;
};

void add_instance_options(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("-i,--instance", a.name, "catalog instance name (GSD-2 ... GSD-F-6)");
  cmd->add_option("-f,--file", a.file, "instance JSON file");
  cmd->add_flag("--dwave-convention", a.dwave, "read catalog/file values as hardware objective coefficients");
}

Loaded load(const InstanceArgs& a) {
  const auto convention = a.dwave ? SignConvention::DWave : SignConvention::Verbatim;
  if (!a.file.empty()) {
    return {fs::path(a.file).stem().string(), apply_convention(load_instance(a.file), convention)};
  }
  if (a.name.empty()) throw InvalidArgument("give --instance or --file");
  return {a.name, find_instance(a.name, convention).model};
}

void add_backend_options(CLI::App* cmd, BackendArgs& b) {
  cmd->add_option("-b,--backend", b.kind, "sampler backend")
      ->check(CLI::IsMember({"exact", "toy", "emulator", "remote"}))
      ->capture_default_str();
  cmd->add_option("--temperature-table", b.temperature_table, "emulator effective-temperature table (JSON)");
  cmd->add_option("--fixtures", b.fixtures, "remote fixture directory")->capture_default_str();
  cmd->add_option("--remote-mode", b.remote_mode, "remote mode")
      ->check(CLI::IsMember({"replay", "record", "live"}))
      ->capture_default_str();
  cmd->add_option("--toy-gamma", b.gamma, "toy backend transverse scale")->capture_default_str();
  cmd->add_option("--toy-eta", b.eta, "toy backend noise amplitude")->capture_default_str();
  cmd->add_option("--toy-beta", b.beta, "toy backend inverse temperature")->capture_default_str();
  cmd->add_flag("--toy-absolute-transverse", b.absolute_transverse, "toy transverse field not scaled by J_in");
}

std::unique_ptr<SamplerBackend> make_backend(const BackendArgs& b) {
  if (b.kind == "exact") return std::make_unique<ExactBackend>();
  if (b.kind == "toy") return std::make_unique<ToyModelBackend>(ToyModelConfig{b.gamma, b.eta, b.beta, b.absolute_transverse});
  if (b.kind == "emulator") {
    if (b.temperature_table.empty()) return std::make_unique<EmulatorBackend>();
    return std::make_unique<EmulatorBackend>(temperature_table_from_json(read_json_file(b.temperature_table)));
  }
  RemoteConfig rc;
  rc.fixture_dir = b.fixtures;
  rc.mode = b.remote_mode == "live" ? RemoteMode::Live : b.remote_mode == "record" ? RemoteMode::Record : RemoteMode::Replay;
  if (rc.mode != RemoteMode::Replay) rc.transport = http_transport_from_env();
  return std::make_unique<RemoteBackend>(std::move(rc));
}

Json backend_json(const BackendArgs& b) {
  Json j{{"kind", b.kind}};
  if (b.kind == "toy") {
    j["gamma"] = b.gamma;
    j["eta"] = b.eta;
    j["beta"] = b.beta;
    j["absolute_transverse"] = b.absolute_transverse;
  } else if (b.kind == "emulator") {
    j["table"] = temperature_table_to_json(b.temperature_table.empty()
                                               ? EffectiveTemperatureTable::defaults()
                                               : temperature_table_from_json(read_json_file(b.temperature_table)));
  } else if (b.kind == "remote") {
    j["fixtures"] = b.fixtures;
    j["mode"] = b.remote_mode;
  }
  return j;
}

Json instance_json(const InstanceArgs& a, const Loaded& l) {
  return Json{{"name", l.label},
              {"file", a.file},
              {"convention", a.dwave ? "dwave" : "verbatim"},
              {"model", model_to_json(l.model)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs-sampling diagnostics for annealer-style samplers"};
  app.require_subcommand(1);
  app.fallthrough();
  auto config = std::make_shared<JsonConfig>();
  app.config_formatter(config);
  app.set_config("--config", "", "JSON config file");

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  app.add_option("-s,--seed", seed, "master seed")->capture_default_str();
  app.add_option("-o,--out-dir", out_dir, "output directory")->capture_default_str();

  // degeneracy
  auto* deg = app.add_subcommand("degeneracy", "brute-force ground-state degeneracy");
  InstanceArgs deg_inst;
  bool deg_all = false;
  add_instance_options(deg, deg_inst);
  deg->add_flag("--all", deg_all, "every catalog instance");

  // tv-sweep
  auto* tv = app.add_subcommand("tv-sweep", "alpha_in x anneal label sweep of TV and alpha_out");
  InstanceArgs tv_inst;
  BackendArgs tv_backend;
  TvSweepConfig tv_cfg;
  bool tv_no_gauge = false;
  std::string tv_csv;
  add_instance_options(tv, tv_inst);
  add_backend_options(tv, tv_backend);
  tv->add_option("--alpha-in", tv_cfg.alpha_in, "alpha_in values (default: 30-point grid on [0, 1])")->delimiter(',');
  tv->add_option("--labels", tv_cfg.labels, "anneal labels")->delimiter(',')->capture_default_str();
  tv->add_option("--alpha-max", tv_cfg.alpha_max, "top of the alpha_out fitting grid")->capture_default_str();
  tv->add_option("-n,--samples", tv_cfg.samples, "samples per cell")->capture_default_str();
  tv->add_option("--batch", tv_cfg.batch, "samples per gauge")->capture_default_str();
  tv->add_option("--floor-trials", tv_cfg.floor_trials, "trials for the finite-sampling floor")->capture_default_str();
  tv->add_flag("--no-gauge", tv_no_gauge, "identity gauge for every batch");
  tv->add_option("--csv", tv_csv, "output CSV path (default: <out-dir>/tv_sweep_<instance>_<backend>.csv)");

  // chain3 / bs
  auto* chain = app.add_subcommand("chain3", "three-spin chain reconstruction sweep");
  auto* bs = app.add_subcommand("bs", "background-susceptibility baseline sweep");
  ChainSweepConfig chain_cfg;
  BackendArgs chain_backend;
  std::string chain_source = "toy";
  std::string chain_csv;
  for (auto* cmd : {chain, bs}) {
    cmd->add_option("--j-in", chain_cfg.j_in, "J_in values (default: 30-point grid on [0, 1])")->delimiter(',');
    cmd->add_option("--beta", chain_cfg.beta, "inverse temperature")->capture_default_str();
    cmd->add_option("--chi", chain_cfg.chi, "background susceptibility")->capture_default_str();
    cmd->add_option("--csv", chain_csv, "output CSV path");
  }
  chain->add_option("--source", chain_source, "distribution source")
      ->check(CLI::IsMember({"toy", "bs", "backend"}))
      ->capture_default_str();
  chain->add_option("--gamma", chain_cfg.gamma, "transverse scale")->capture_default_str();
  chain->add_option("--eta", chain_cfg.eta, "noise amplitude")->capture_default_str();
  chain->add_option("-n,--samples", chain_cfg.samples, "samples per point (backend source)")->capture_default_str();
  chain->add_option("--batch", chain_cfg.batch, "samples per gauge (backend source)")->capture_default_str();
  chain->add_option("--label", chain_cfg.anneal_label, "anneal label (backend source)")->capture_default_str();
  chain->add_option("--l1", chain_cfg.screening.l1, "L1 penalty on couplings")->capture_default_str();
  add_backend_options(chain, chain_backend);

  // fit-alpha
  auto* fit = app.add_subcommand("fit-alpha", "closest Gibbs distribution on the alpha grid");
  InstanceArgs fit_inst;
  std::string fit_nu;
  double fit_alpha_max = 10.0;
  std::size_t fit_floor_samples = 0;
  add_instance_options(fit, fit_inst);
  fit->add_option("--nu", fit_nu, "distribution JSON ({n_sites, probs} or {samples})")->required();
  fit->add_option("--alpha-max", fit_alpha_max, "top of the grid")->capture_default_str();
  fit->add_option("--floor-samples", fit_floor_samples, "also report the finite-sampling floor for M samples");

  // gen-instance
  auto* gen = app.add_subcommand("gen-instance", "random +-1 instance on the two-cell Chimera patch");
  bool gen_fields = false;
  std::optional<std::size_t> gen_target;
  std::size_t gen_tries = 10000;
  std::string gen_out;
  gen->add_flag("--fields", gen_fields, "draw local fields too");
  gen->add_option("--target", gen_target, "required ground-state degeneracy");
  gen->add_option("--max-tries", gen_tries, "rejection-sampling budget")->capture_default_str();
  gen->add_option("--out", gen_out, "instance JSON path (default: <out-dir>/instance_<seed>.json)");

  // sample
  auto* smp = app.add_subcommand("sample", "draw gauge-cycled samples from a backend");
  InstanceArgs smp_inst;
  BackendArgs smp_backend;
  double smp_alpha = 1.0;
  CollectOptions smp_opt;
  bool smp_no_gauge = false;
  std::string smp_out;
  add_instance_options(smp, smp_inst);
  add_backend_options(smp, smp_backend);
  smp->add_option("--alpha-in", smp_alpha, "scale applied to the instance")->capture_default_str();
  smp->add_option("-n,--samples", smp_opt.total, "number of samples")->capture_default_str();
  smp->add_option("--batch", smp_opt.batch, "samples per gauge")->capture_default_str();
  smp->add_option("--label", smp_opt.anneal_label, "anneal label")->capture_default_str();
  smp->add_flag("--no-gauge", smp_no_gauge, "identity gauge for every batch");
  smp->add_option("--out", smp_out, "output JSON path (default: stdout)");

  for (auto* sub : app.get_subcommands({})) config->sections.insert(sub->get_name());
  for (int k = 1; k < argc; ++k) {
    if (config->sections.contains(argv[k])) {
      config->active = argv[k];
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const fs::path out(out_dir);

    if (deg->parsed()) {
      std::vector<std::pair<std::string, IsingModel>> models;
      std::vector<std::optional<std::size_t>> declared;
      if (deg_all) {
        for (auto& e : catalog(deg_inst.dwave ? SignConvention::DWave : SignConvention::Verbatim)) {
          models.emplace_back(e.name, e.model);
          declared.push_back(e.declared_degeneracy);
        }
      } else {
        auto l = load(deg_inst);
        models.emplace_back(l.label, l.model);
        declared.push_back(deg_inst.file.empty() ? std::optional<std::size_t>(find_instance(deg_inst.name).declared_degeneracy)
                                                 : std::nullopt);
      }
      for (std::size_t k = 0; k < models.size(); ++k) {
        const auto gs = ground_states(models[k].second);
        Json j{{"instance", models[k].first}, {"degeneracy", gs.degeneracy}, {"min_energy", gs.min_energy}};
        if (declared[k]) j["declared"] = *declared[k];
        std::cout << j.dump() << "\n";
      }
      return 0;
    }

    if (tv->parsed()) {
      const auto l = load(tv_inst);
      const auto backend = make_backend(tv_backend);
      tv_cfg.model = l.model;
      tv_cfg.seed = seed;
      tv_cfg.policy = tv_no_gauge ? GaugePolicy::Identity : GaugePolicy::Random;
      const auto rows = run_tv_sweep(*backend, tv_cfg);
      const fs::path csv = tv_csv.empty() ? out / ("tv_sweep_" + l.label + "_" + backend->id() + ".csv") : fs::path(tv_csv);
      Json manifest{{"command", "tv-sweep"},
                    {"instance", instance_json(tv_inst, l)},
                    {"backend", backend_json(tv_backend)},
                    {"seed", seed},
                    {"alpha_in", tv_cfg.alpha_in.empty() ? build_alpha_grid(1.0).points : tv_cfg.alpha_in},
                    {"labels", tv_cfg.labels},
                    {"alpha_max", tv_cfg.alpha_max},
                    {"alpha_grid", build_alpha_grid(tv_cfg.alpha_max).points},
                    {"samples", tv_cfg.samples},
                    {"batch", tv_cfg.batch},
                    {"gauges", tv_no_gauge ? "identity" : "random"},
                    {"floor_trials", tv_cfg.floor_trials},
                    {"rows", rows.size()}};
      write_csv_with_manifest(csv, tv_sweep_csv(rows), manifest);
      std::cout << csv.string() << "\n";
      return 0;
    }

    if (chain->parsed() || bs->parsed()) {
      std::unique_ptr<SamplerBackend> backend;
      std::string source = bs->parsed() ? "bs" : chain_source;
      chain_cfg.source = source == "bs" ? ChainSource::Bs : source == "backend" ? ChainSource::Backend : ChainSource::Toy;
      if (chain_cfg.source == ChainSource::Backend) {
        backend = make_backend(chain_backend);
        chain_cfg.backend = backend.get();
      }
      chain_cfg.seed = seed;
      if (chain_cfg.j_in.empty()) chain_cfg.j_in = build_alpha_grid(1.0).points;
      const auto rows = run_chain_sweep(chain_cfg);
      const fs::path csv = !chain_csv.empty() ? fs::path(chain_csv)
                           : bs->parsed()     ? out / "bs.csv"
                                              : out / ("chain3_" + source + ".csv");
      std::vector<double> x, y;
      bool converged = true;
      for (const auto& r : rows) {
        x.push_back(r.j_in);
        y.push_back(r.j13);
        converged = converged && r.converged;
      }
      const auto crossing = zero_crossing(x, y);
      Json manifest{{"command", bs->parsed() ? "bs" : "chain3"},
                    {"source", source},
                    {"j_in", chain_cfg.j_in},
                    {"beta", chain_cfg.beta},
                    {"seed", seed},
                    {"couplings", "effective, inverse temperature folded in"},
                    {"converged", converged},
                    {"j13_zero_crossing", crossing ? Json(*crossing) : Json(nullptr)},
                    {"rows", rows.size()}};
      if (chain_cfg.source == ChainSource::Bs) manifest["chi"] = chain_cfg.chi;
      if (chain_cfg.source == ChainSource::Toy) {
        manifest["gamma"] = chain_cfg.gamma;
        manifest["eta"] = chain_cfg.eta;
      }
      if (backend) {
        manifest["backend"] = backend_json(chain_backend);
        manifest["samples"] = chain_cfg.samples;
        manifest["batch"] = chain_cfg.batch;
        manifest["label"] = chain_cfg.anneal_label;
      }
      if (chain_cfg.screening.l1 > 0.0) manifest["l1"] = chain_cfg.screening.l1;
      write_csv_with_manifest(csv, chain_sweep_csv(rows), manifest);
      std::cout << csv.string() << "\n";
      if (crossing) std::cout << "j13 zero crossing at J_in = " << format_number(*crossing) << "\n";
      return 0;
    }

    if (fit->parsed()) {
      const auto l = load(fit_inst);
      const auto nu = distribution_from_json(read_json_file(fit_nu));
      const auto grid = build_alpha_grid(fit_alpha_max);
      const GibbsGrid gibbs(l.model, grid);
      const auto f = gibbs.fit(nu);
      Json j{{"instance", l.label}, {"alpha_out", f.alpha_out}, {"tv", f.tv_min}, {"grid_index", f.grid_index}};
      if (fit_floor_samples > 0) {
        j["tv_floor"] = finite_sampling_floor(gibbs.at(f.grid_index), fit_floor_samples, kDefaultFloorTrials, seed).mean;
      }
      std::cout << j.dump() << "\n";
      return 0;
    }

    if (gen->parsed()) {
      Rng rng(seed);
      const auto g = generate_instance(rng, gen_fields, gen_target, gen_tries);
      const fs::path path = gen_out.empty() ? out / ("instance_" + std::to_string(seed) + ".json") : fs::path(gen_out);
      save_instance(path, g.model);
      std::cout << Json{{"path", path.string()}, {"degeneracy", g.degeneracy}, {"attempts", g.attempts}}.dump() << "\n";
      return 0;
    }

    if (smp->parsed()) {
      const auto l = load(smp_inst);
      const auto backend = make_backend(smp_backend);
      smp_opt.seed = seed;
      smp_opt.policy = smp_no_gauge ? GaugePolicy::Identity : GaugePolicy::Random;
      const auto set = collect_with_gauges(*backend, l.model.scaled(smp_alpha), smp_opt);
      const auto text = sample_set_to_json(set).dump() + "\n";
      if (smp_out.empty()) {
        std::cout << text;
      } else {
        write_text_file(smp_out, text);
      }
      return 0;
    }
  } catch (const qagibbs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
