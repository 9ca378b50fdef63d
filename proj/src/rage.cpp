#include "fockrage/rage.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace fockrage {

double EscapeConfig::t_max_guard() const {
  const double v_max = 2.0 * std::abs(lattice.hopping);
  if (v_max <= 0.0) return std::numeric_limits<double>::infinity();
  return lattice.length / (2.0 * v_max);
}

void EscapeConfig::validate() const {
  if (N < 1) throw InputError("EscapeConfig: N must be >= 1");
  if (static_cast<int>(particles.size()) != N) {
    throw InputError("EscapeConfig: need one particle recipe per particle");
  }
  if (t_schedule.empty()) {
    throw InputError("EscapeConfig: empty T schedule");
  }
  const double guard = t_max_guard();
  double prev = 0.0;
  for (double t : t_schedule) {
    if (!(t > prev)) {
      throw InputError("EscapeConfig: T schedule must be increasing");
    }
    if (t > guard + 1e-12) {
      throw InputError("EscapeConfig: T schedule exceeds the reflection guard");
    }
    prev = t;
  }
}

Vector one_particle_state(const ParticleRecipe& recipe,
                          const SpectralData& h_spectral, int length) {
  if (recipe.kind == ParticleRecipe::Kind::bound_state) {
    if (recipe.bound_index < 0 || recipe.bound_index >= h_spectral.dim()) {
      throw InputError("one_particle_state: bound index out of range");
    }
    return h_spectral.eigenvectors.col(recipe.bound_index);
  }
  const WavepacketSpec& p = recipe.packet;
  if (!(p.width > 0.0)) {
    throw InputError("one_particle_state: packet width must be positive");
  }
  Vector psi(length);
  for (int x = 0; x < length; ++x) {
    const double envelope =
        std::exp(-std::pow(x - p.center, 2) / (4.0 * p.width * p.width));
    psi(x) = std::exp(Complex(0.0, p.momentum * x)) * envelope;
  }
  const double norm = psi.norm();
  if (norm < 1e-14) {
    throw InputError("one_particle_state: packet vanishes on the lattice");
  }
  return psi / norm;
}

FockDensity escape_initial_state(const EscapeConfig& config,
                                 const SpectralData& h_spectral) {
  config.validate();
  std::vector<Vector> factors;
  factors.reserve(config.N);
  for (const ParticleRecipe& r : config.particles) {
    factors.push_back(one_particle_state(r, h_spectral, config.lattice.length));
  }
  SectorBasis top =
      sector_basis(config.lattice.length, config.N, config.statistics);
  Vector psi = compress_product(top, factors);
  const double norm = psi.norm();
  if (norm < 1e-12) {
    throw InputError(
        "escape_initial_state: recipe (anti)symmetrizes to zero");
  }
  psi /= norm;
  Matrix projector = psi * psi.adjoint();
  return single_sector_state(DensityMatrix{std::move(top), std::move(projector)},
                             config.N);
}

SweepTable ergodic_sweep(const FockDensity& state,
                         const std::vector<SpectralData>& spectra,
                         const std::vector<double>& t_list,
                         const ObservableDictionary& dict) {
  double prev_t = 0.0;
  for (double t : t_list) {
    if (!(t > prev_t)) {
      throw InputError("ergodic_sweep: T list must be increasing");
    }
    prev_t = t;
  }
  SweepTable table;
  table.labels.reserve(dict.entries.size());
  for (const DictionaryEntry& e : dict.entries) table.labels.push_back(e.label);

  ReducedSet previous;
  bool have_previous = false;
  for (double t : t_list) {
    const FockDensity mean = ergodic_mean(state, spectra, t);
    ReducedSet reduced = reduce_all(mean);
    table.t_values.push_back(t);
    table.pairings.push_back(dictionary_pairings(dict, reduced));
    table.gaps.push_back(
        have_previous ? weak_star_gap(reduced, previous, dict) : 0.0);
    previous = std::move(reduced);
    have_previous = true;
  }
  return table;
}

LimitReport extract_limit(const FockDensity& state,
                          const std::vector<SpectralData>& spectra,
                          double t_star, int window_center, int window_radius,
                          const std::vector<double>& gap_history,
                          bool dephase_candidate) {
  if (!(t_star > 0.0)) throw InputError("extract_limit: T_star must be positive");
  const FockDensity mean = ergodic_mean(state, spectra, t_star);
  ReducedSet reduced = reduce_all(mean);

  // windowed compression of every reduced matrix
  for (int n = 0; n <= reduced.N; ++n) {
    const Matrix proj = sector_window_projector(reduced.gammas[n].sector,
                                                window_center, window_radius);
    reduced.gammas[n].matrix = proj * reduced.gammas[n].matrix * proj;
  }

  FockDensity reconstructed = reconstruct_blocks(reduced);

  LimitReport report;
  report.candidate = reconstructed;
  report.blocks.reserve(reduced.N + 1);
  for (int n = 0; n <= reduced.N; ++n) {
    const Matrix& raw = reconstructed.blocks[n].matrix;
    const Matrix dephased = dephase(raw, spectra[n]);
    BlockReport block;
    block.sector = n;
    block.offdiag_residual = (raw - dephased).norm();
    const Matrix& candidate = dephase_candidate ? dephased : raw;
    report.candidate.blocks[n].matrix = candidate;
    block.trace = candidate.trace().real();
    Eigen::SelfAdjointEigenSolver<Matrix> es(candidate,
                                             Eigen::EigenvaluesOnly);
    block.min_eigenvalue = es.eigenvalues().minCoeff();
    const Matrix h_n = spectra[n].eigenvectors *
                       spectra[n].eigenvalues.asDiagonal() *
                       spectra[n].eigenvectors.adjoint();
    block.commutator_residual = (h_n * candidate - candidate * h_n).norm();
    const Matrix in_eigenbasis = spectra[n].eigenvectors.adjoint() *
                                 candidate * spectra[n].eigenvectors;
    block.alphas.resize(in_eigenbasis.rows());
    for (Eigen::Index j = 0; j < in_eigenbasis.rows(); ++j) {
      block.alphas[j] = in_eigenbasis(j, j).real();
    }
    report.blocks.push_back(std::move(block));
  }
  report.total_trace = report.candidate.total_trace();
  report.gap_history = gap_history;
  report.gap_nonincreasing = true;
  for (size_t i = 2; i < gap_history.size(); ++i) {
    if (gap_history[i] > gap_history[i - 1] + 1e-12) {
      report.gap_nonincreasing = false;
      break;
    }
  }
  return report;
}

FockDensity scattering_reference(const std::vector<AnsatzTerm>& terms,
                                 const std::vector<SpectralData>& spectra,
                                 const std::vector<SectorBasis>& sectors) {
  if (sectors.empty()) throw InputError("scattering_reference: no sectors");
  const int N = static_cast<int>(sectors.size()) - 1;
  FockDensity out = zero_fock_density(sectors[0].modes, N,
                                      sectors[0].statistics);
  double total = 0.0;
  for (const AnsatzTerm& term : terms) {
    if (term.sector < 0 || term.sector > N) {
      throw InputError("scattering_reference: term sector out of range");
    }
    if (term.weight < -1e-12) {
      throw InputError("scattering_reference: negative weight");
    }
    total += term.weight;
    if (term.sector == 0) {
      out.blocks[0].matrix(0, 0) += term.weight;
      continue;
    }
    const SpectralData& s = spectra[term.sector];
    if (term.eigenindex < 0 || term.eigenindex >= s.dim()) {
      throw InputError("scattering_reference: eigenindex out of range");
    }
    const Vector phi = s.eigenvectors.col(term.eigenindex);
    out.blocks[term.sector].matrix += term.weight * (phi * phi.adjoint());
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("scattering_reference: weights must sum to 1");
  }
  return out;
}

std::vector<AnsatzTerm> ansatz_from_recipe(
    const EscapeConfig& config, const SpectralData& h_spectral,
    const std::vector<SpectralData>& spectra,
    const std::vector<SectorBasis>& sectors) {
  config.validate();
  std::vector<const ParticleRecipe*> bound;
  for (const ParticleRecipe& r : config.particles) {
    if (r.kind == ParticleRecipe::Kind::bound_state) bound.push_back(&r);
  }
  const int k = static_cast<int>(bound.size());
  if (k == 0) {
    return {AnsatzTerm{0, 0, 1.0}};
  }
  if (k == 1) {
    return {AnsatzTerm{1, bound.front()->bound_index, 1.0}};
  }
  if (k == config.N) {
    // all-bound product: locate the matching eigenstate of H_N
    std::vector<Vector> factors;
    for (const ParticleRecipe* r : bound) {
      factors.push_back(
          one_particle_state(*r, h_spectral, config.lattice.length));
    }
    Vector psi = compress_product(sectors[config.N], factors);
    const double norm = psi.norm();
    if (norm < 1e-12) {
      throw InputError("ansatz_from_recipe: bound product vanishes");
    }
    psi /= norm;
    const SpectralData& s = spectra[config.N];
    int best = 0;
    double best_overlap = 0.0;
    for (int j = 0; j < s.dim(); ++j) {
      const double overlap = std::norm(Complex(s.eigenvectors.col(j).adjoint() * psi));
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = j;
      }
    }
    if (best_overlap < 1.0 - 1e-8) {
      throw InputError(
          "ansatz_from_recipe: bound product is not an eigenstate of H_N; "
          "initial state is not in the factorized ansatz form");
    }
    return {AnsatzTerm{config.N, best, 1.0}};
  }
  throw InputError(
      "ansatz_from_recipe: recipes with several bound particles plus packets "
      "are not in the supported factorized ansatz form");
}

}  // namespace fockrage
