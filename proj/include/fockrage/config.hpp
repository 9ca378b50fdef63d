#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fockrage/fock.hpp"
#include "fockrage/io.hpp"

namespace fockrage {

struct ModelConfig {
  LatticeSpec lattice;
  InteractionProfile interaction;
  bool has_interaction = false;  // profile "none" clears this
  Statistics statistics = Statistics::boson;
  int N = 1;
  double margin = 0.1;
  int sector_cap = kDefaultSectorCap;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "json"};
};

/// Parsed experiment file. The `run` block is subcommand-specific and is
/// validated by the runner that consumes it.
struct ExperimentConfig {
  ModelConfig model;
  OutputConfig output;
  std::uint64_t seed = 0;
  Json run = Json::object();
};

/// Parse and validate; the potential accepts either a per-site array or the
/// shorthands {"kind":"zero"} and {"kind":"delta","site":s,"depth":v}
/// (normalized to the array on parse).
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a of the canonical serialization; stamped into every output file.
std::string config_hash(const ExperimentConfig& config);

TwoBodyOperator build_interaction(const ModelConfig& model);

}  // namespace fockrage
