#pragma once

#include <filesystem>
#include <random>

#include "fockrage/config.hpp"
#include "fockrage/rage.hpp"

namespace fockrage {

/// Everything the pipelines derive from the model block.
struct ModelParts {
  OneBodyOperator h_raw;
  OneBodyOperator h;  // shifted so min eig = 1 + margin
  TwoBodyOperator w;
  FockOperator hamiltonian;
  std::vector<SpectralData> spectra;  // per block of `hamiltonian`
  SpectralData h_spectral;            // one-body, lattice designation applied
};

ModelParts build_model(const ModelConfig& model);

/// Builds the initial FockDensity from the run.initial_state recipe:
/// vacuum | eigenstate | product | random_pure | random_mixed.
FockDensity initial_state_from_json(const Json& recipe,
                                    const ModelParts& parts,
                                    const ModelConfig& model,
                                    std::mt19937_64& rng);

void run_spectrum(const ExperimentConfig& config,
                  const std::filesystem::path& out_dir);
void run_evolve(const ExperimentConfig& config,
                const std::filesystem::path& out_dir);
void run_ergodic(const ExperimentConfig& config,
                 const std::filesystem::path& out_dir);
void run_bbgky(const ExperimentConfig& config,
               const std::filesystem::path& out_dir);
void run_rage_classic(const ExperimentConfig& config,
                      const std::filesystem::path& out_dir);
void run_rage_escape(const ExperimentConfig& config,
                     const std::filesystem::path& out_dir);

/// Full command-line entry point; returns the process exit code
/// (0 ok, 2 config error, 3 capacity error, 4 numeric/accuracy error).
int cli_main(int argc, const char* const* argv);

}  // namespace fockrage
