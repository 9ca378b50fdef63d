#pragma once

#include <string>
#include <vector>

#include "fockrage/bbgky.hpp"

namespace fockrage {

struct WavepacketSpec {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
};

struct ParticleRecipe {
  enum class Kind { bound_state, wavepacket };
  Kind kind = Kind::bound_state;
  int bound_index = 0;  // eigenvector index of the one-body h, ascending
  WavepacketSpec packet;
};

struct EscapeConfig {
  LatticeSpec lattice;
  InteractionProfile interaction;
  Statistics statistics = Statistics::boson;
  int N = 2;
  double margin = 0.1;
  std::vector<ParticleRecipe> particles;  // one per particle
  std::vector<double> t_schedule;         // increasing, <= t_max_guard()
  int window_center = 0;
  int window_radius = 8;

  /// Reflection guard L / (2 v_max) with v_max = 2|hopping|.
  double t_max_guard() const;
  void validate() const;
};

/// Normalized one-particle vector for a recipe entry: an eigenvector of the
/// (shifted) one-body operator, or a Gaussian wavepacket
/// exp(i k x) exp(-(x-c)^2 / (4 sigma^2)).
Vector one_particle_state(const ParticleRecipe& recipe,
                          const SpectralData& h_spectral, int length);

/// (Anti)symmetrized product of the per-particle recipes, as a pure state
/// supported on sector N.
FockDensity escape_initial_state(const EscapeConfig& config,
                                 const SpectralData& h_spectral);

struct SweepTable {
  std::vector<std::string> labels;      // dictionary entry labels
  std::vector<double> t_values;
  std::vector<std::vector<double>> pairings;  // per T, per entry
  std::vector<double> gaps;  // weak-star gap to the previous row, 0 first
};

/// Dictionary pairings of M(T) for each T, plus consecutive weak-star gaps.
SweepTable ergodic_sweep(const FockDensity& state,
                         const std::vector<SpectralData>& spectra,
                         const std::vector<double>& t_list,
                         const ObservableDictionary& dict);

struct BlockReport {
  int sector = 0;
  double trace = 0.0;
  double min_eigenvalue = 0.0;
  double commutator_residual = 0.0;  // ||[H_n, G_n]||_F of the candidate
  double offdiag_residual = 0.0;     // ||Ghat_n - sum_c P_c Ghat_n P_c||_F
  std::vector<double> alphas;        // <phi_{n,j}, G_n phi_{n,j}>
};

struct LimitReport {
  FockDensity candidate;
  std::vector<BlockReport> blocks;
  double total_trace = 0.0;
  std::vector<double> gap_history;
  bool gap_nonincreasing = false;  // reported, never assumed
};

/// Windowed compression of the reduced matrices of M(T_star), block
/// reconstruction, then per-block eigenprojection analysis against H_n.
/// With dephase_candidate (default) the reported blocks are
/// sum_c P_c Ghat_n P_c, the convex-combination form; the discarded
/// coherence is the off-diagonal residual.
LimitReport extract_limit(const FockDensity& state,
                          const std::vector<SpectralData>& spectra,
                          double t_star, int window_center, int window_radius,
                          const std::vector<double>& gap_history = {},
                          bool dephase_candidate = true);

struct AnsatzTerm {
  int sector = 0;
  int eigenindex = 0;  // into the spectral data of H_sector
  double weight = 0.0; // ||psi_{n,j}||^2
};

/// Predicted limit (+)_n sum_j alpha_{n,j} |phi_{n,j}><phi_{n,j}| from an
/// explicit bound/free factorization.
FockDensity scattering_reference(const std::vector<AnsatzTerm>& terms,
                                 const std::vector<SpectralData>& spectra,
                                 const std::vector<SectorBasis>& sectors);

/// Derives the ansatz terms from a product recipe: all packets -> vacuum,
/// one bound + packets -> that bound state of H_1, all bound -> the matching
/// eigenstate of H_N. Anything else is not in factorized form.
std::vector<AnsatzTerm> ansatz_from_recipe(
    const EscapeConfig& config, const SpectralData& h_spectral,
    const std::vector<SpectralData>& spectra,
    const std::vector<SectorBasis>& sectors);

}  // namespace fockrage
