#pragma once

// JSON encodings: instance files, distributions, sample sets and
// reconstruction results.
//
// Instance format:
//   {"sites": [296, ...], "couplings": [[i, j, J], ...], "fields": [[i, h], ...]}

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qagibbs/discrete_distribution.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/ising.hpp"
#include "qagibbs/samples.hpp"
#include "qagibbs/screening.hpp"

namespace qagibbs {

using Json = nlohmann::json;

inline Json model_to_json(const IsingModel& model) {
  Json couplings = Json::array();
  for (const auto& c : model.couplings()) couplings.push_back(Json::array({c.i, c.j, c.value}));
  Json fields = Json::array();
  for (const auto& f : model.fields()) fields.push_back(Json::array({f.site, f.value}));
  return Json{{"sites", model.sites()}, {"couplings", couplings}, {"fields", fields}};
}

inline IsingModel model_from_json(const Json& j) {
  try {
    std::vector<SiteId> sites = j.at("sites").get<std::vector<SiteId>>();
    std::vector<Coupling> couplings;
    for (const auto& c : j.value("couplings", Json::array())) {
      if (!c.is_array() || c.size() != 3) throw InvalidArgument("coupling entries must be [i, j, value]");
      couplings.push_back({c[0].get<SiteId>(), c[1].get<SiteId>(), c[2].get<double>()});
    }
    std::vector<Field> fields;
    for (const auto& f : j.value("fields", Json::array())) {
      if (!f.is_array() || f.size() != 2) throw InvalidArgument("field entries must be [i, value]");
      fields.push_back({f[0].get<SiteId>(), f[1].get<double>()});
    }
    return IsingModel(std::move(sites), std::move(couplings), std::move(fields));
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("instance JSON: ") + e.what());
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

inline IsingModel load_instance(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

inline void save_instance(const std::filesystem::path& path, const IsingModel& model) {
  write_text_file(path, model_to_json(model).dump(2) + "\n");
}

inline Json distribution_to_json(const DiscreteDistribution& dist) {
  return Json{{"n_sites", dist.n_sites()}, {"probs", std::vector<double>(dist.probs().begin(), dist.probs().end())}};
}

inline std::vector<int> spins_of(StateIndex state, std::size_t n_sites) {
  std::vector<int> spins(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k) spins[k] = ((state >> k) & 1U) ? 1 : -1;
  return spins;
}

inline StateIndex index_of_spins(const Json& row, std::size_t n_sites) {
  if (!row.is_array() || row.size() != n_sites) {
    throw DecodeError("sample row must be an array of " + std::to_string(n_sites) + " spins");
  }
  StateIndex state = 0;
  for (std::size_t k = 0; k < n_sites; ++k) {
    if (!row[k].is_number_integer()) throw DecodeError("spins must be integers");
    const int s = row[k].get<int>();
    if (s == 1) {
      state |= StateIndex{1} << k;
    } else if (s != -1) {
      throw DecodeError("spins must be -1 or +1");
    }
  }
  return state;
}

// Accepts {"n_sites", "probs"} or {"n_sites"?, "samples": [[+-1, ...], ...]}.
inline DiscreteDistribution distribution_from_json(const Json& j) {
  try {
    if (j.contains("probs")) {
      return DiscreteDistribution(j.at("n_sites").get<std::size_t>(), j.at("probs").get<std::vector<double>>());
    }
    const auto& rows = j.at("samples");
    if (!rows.is_array() || rows.empty()) throw InvalidArgument("distribution JSON: empty samples");
    const std::size_t n = j.contains("n_sites") ? j.at("n_sites").get<std::size_t>() : rows[0].size();
    check_enumerable(n, "distribution JSON");
    std::vector<StateIndex> states;
    states.reserve(rows.size());
    for (const auto& row : rows) states.push_back(index_of_spins(row, n));
    std::vector<double> probs(std::size_t{1} << n, 0.0);
    for (auto s : states) probs[s] += 1.0;
    for (auto& p : probs) p /= static_cast<double>(states.size());
    return DiscreteDistribution(n, std::move(probs));
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("distribution JSON: ") + e.what());
  }
}

inline Json sample_set_to_json(const SampleSet& set) {
  Json gauges = Json::array();
  for (const auto& g : set.gauges) gauges.push_back(g.values());
  Json samples = Json::array();
  for (auto s : set.configs) samples.push_back(spins_of(s, set.n_sites));
  return Json{{"backend_id", set.backend_id},
              {"n_sites", set.n_sites},
              {"batch_size", set.batch_size},
              {"request",
               {{"model", model_to_json(set.request.model)},
                {"anneal_label", set.request.anneal_label},
                {"num_samples", set.request.num_samples},
                {"seed", set.request.seed}}},
              {"gauges", gauges},
              {"samples", samples}};
}

inline Json reconstruction_to_json(const ReconstructionResult& r) {
  Json couplings = Json::array();
  for (const auto& [edge, v] : r.couplings) couplings.push_back(Json::array({edge.first, edge.second, v}));
  Json fields = Json::array();
  for (const auto& [site, v] : r.fields) fields.push_back(Json::array({site, v}));
  Json nodes = Json::array();
  for (const auto& d : r.diagnostics) {
    nodes.push_back({{"node", d.node},
                     {"objective", d.objective},
                     {"gradient_norm", d.gradient_norm},
                     {"iterations", d.iterations},
                     {"converged", d.converged}});
  }
  return Json{{"sites", r.sites},       {"couplings", couplings},          {"fields", fields},
              {"diagnostics", nodes},   {"max_asymmetry", r.max_asymmetry}, {"converged", r.converged}};
}

}  // namespace qagibbs
