#pragma once

// GSD / GSD-F catalog on a two-cell Chimera patch, and the random instance
// generator over the same edge set.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qagibbs/catalog_data.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/io.hpp"
#include "qagibbs/ising.hpp"
#include "qagibbs/random.hpp"

namespace qagibbs {

struct CatalogEntry {
  std::string name;
  IsingModel model;
  std::size_t declared_degeneracy = 0;
  bool has_fields = false;
};

// Verbatim keeps the transcribed values. DWave reads the table entries as
// coefficients of the hardware objective sum J s s + sum h s, i.e. negates
// both J and h relative to H = -sum J s s - sum h s.
enum class SignConvention { Verbatim, DWave };

inline IsingModel apply_convention(const IsingModel& model, SignConvention convention) {
  return convention == SignConvention::DWave ? model.scaled(-1.0) : model;
}

inline CatalogEntry parse_catalog_entry(std::string_view text, SignConvention convention) {
  const Json j = Json::parse(text);
  CatalogEntry entry;
  entry.name = j.at("name").get<std::string>();
  entry.declared_degeneracy = j.at("declared_degeneracy").get<std::size_t>();
  entry.model = apply_convention(model_from_json(j), convention);
  entry.has_fields = !entry.model.fields().empty();
  return entry;
}

inline std::vector<CatalogEntry> catalog(SignConvention convention = SignConvention::Verbatim) {
  std::vector<CatalogEntry> out;
  out.reserve(catalog_data::kEntries.size());
  for (auto text : catalog_data::kEntries) out.push_back(parse_catalog_entry(text, convention));
  return out;
}

inline CatalogEntry find_instance(std::string_view name, SignConvention convention = SignConvention::Verbatim) {
  for (auto text : catalog_data::kEntries) {
    auto entry = parse_catalog_entry(text, convention);
    if (entry.name == name) return entry;
  }
  throw InvalidArgument("unknown instance '" + std::string(name) + "'");
}

inline std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (auto text : catalog_data::kEntries) names.push_back(Json::parse(text).at("name").get<std::string>());
  return names;
}

// Chimera C_{m,n,t} with the usual linear index
//   q = i*n*2t + j*2t + u*t + k
// (row i, column j, side u, position k). Side-0 qubits couple to the cell
// below, side-1 qubits to the cell on the right.
inline std::vector<Edge> chimera_edges(std::size_t m, std::size_t n, std::size_t t = 4) {
  if (m == 0 || n == 0 || t == 0) throw InvalidArgument("chimera_edges: empty lattice");
  auto q = [&](std::size_t i, std::size_t j, std::size_t u, std::size_t k) {
    return static_cast<SiteId>(i * n * 2 * t + j * 2 * t + u * t + k);
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t a = 0; a < t; ++a) {
        for (std::size_t b = 0; b < t; ++b) edges.emplace_back(q(i, j, 0, a), q(i, j, 1, b));
      }
      for (std::size_t k = 0; k < t; ++k) {
        if (i + 1 < m) edges.emplace_back(q(i, j, 0, k), q(i + 1, j, 0, k));
        if (j + 1 < n) edges.emplace_back(q(i, j, 1, k), q(i, j + 1, 1, k));
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

inline std::vector<SiteId> two_cell_sites() {
  std::vector<SiteId> sites;
  for (SiteId s = 296; s <= 311; ++s) sites.push_back(s);
  return sites;
}

// The 36 couplers among sites 296..311, exactly the pairs of the GSD tables.
inline std::vector<Edge> two_cell_chimera_edges() {
  std::vector<Edge> edges;
  auto add_cell = [&](SiteId base) {
    for (SiteId a = 0; a < 4; ++a) {
      for (SiteId b = 4; b < 8; ++b) edges.emplace_back(base + a, base + b);
    }
  };
  add_cell(296);
  add_cell(304);
  for (SiteId k = 0; k < 4; ++k) edges.emplace_back(300 + k, 308 + k);
  std::sort(edges.begin(), edges.end());
  return edges;
}

struct GeneratedInstance {
  IsingModel model;
  std::size_t degeneracy = 0;
  std::size_t attempts = 0;
};

inline IsingModel random_two_cell_model(Rng& rng, bool with_fields) {
  std::vector<Coupling> couplings;
  for (const auto& [i, j] : two_cell_chimera_edges()) couplings.push_back({i, j, double(random_sign(rng))});
  std::vector<Field> fields;
  const auto sites = two_cell_sites();
  if (with_fields) {
    for (SiteId s : sites) fields.push_back({s, double(random_sign(rng))});
  }
  return IsingModel(sites, std::move(couplings), std::move(fields));
}

// Draws +-1 couplings (and fields) until the degeneracy matches the target,
// or once when no target is given.
inline GeneratedInstance generate_instance(Rng& rng, bool with_fields,
                                           std::optional<std::size_t> target_degeneracy = std::nullopt,
                                           std::size_t max_tries = 10000) {
  if (max_tries == 0) throw InvalidArgument("generate_instance: max_tries must be >= 1");
  for (std::size_t attempt = 1; attempt <= max_tries; ++attempt) {
    GeneratedInstance out;
    out.model = random_two_cell_model(rng, with_fields);
    out.degeneracy = ground_states(out.model).degeneracy;
    out.attempts = attempt;
    if (!target_degeneracy || out.degeneracy == *target_degeneracy) return out;
  }
  throw ExhaustionError("generate_instance: degeneracy " + std::to_string(*target_degeneracy) + " not found",
                        max_tries);
}

}  // namespace qagibbs
