#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ruelle/thermo.hpp"

namespace ruelle {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnvVar = "RUELLE_OUT_DIR";

/// Parsed and validated run configuration. All references resolve to
/// built-ins at parse time; malformed input throws UsageError with the
/// violated precondition named.
struct RunConfig {
  nlohmann::json raw;  // the resolved document embedded in manifests

  AprioriMeasure measure;
  Potential potential;
  std::size_t grid_depth;
  double eigen_tol;
  double residual_tol;
  std::uint64_t seed;
  int threads;
  EigenOptions eigen;

  SolveContext context() const {
    SolveContext ctx{measure, grid_depth, 0, threads, eigen};
    return ctx;
  }
  nlohmann::json command_section(const std::string& name) const {
    return raw.contains(name) ? raw.at(name) : nlohmann::json::object();
  }
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Builds a potential from its JSON description against an alphabet; used
// both for the main potential and for observables.
Potential potential_from_json(const nlohmann::json& spec,
                              const Alphabet& alphabet);

// Default grid depth: 8 for two-node alphabets, otherwise the largest depth
// keeping the grid within 1e6 entries (capped at 8).
std::size_t default_grid_depth(std::size_t nodes);

}  // namespace ruelle
