#pragma once

#include <string>
#include <vector>

#include "fockrage/fock.hpp"

namespace fockrage {

struct DensityMatrix {
  SectorBasis sector;
  Matrix matrix;  // dim x dim, Hermitian PSD for states
  double trace() const { return matrix.trace().real(); }
};

/// Block state G_0 (+) ... (+) G_N on the truncated Fock space.
struct FockDensity {
  int N = 0;
  std::vector<DensityMatrix> blocks;  // blocks[n] on sector n
  double total_trace() const;
  /// Hermiticity, positivity (min eig >= -1e-10 * scale) and, when
  /// `normalized`, total trace 1 within 1e-10.
  void validate(bool normalized = true) const;
};

/// Family {Gamma^(n)}_{n=0..N} of reduced density matrices.
struct ReducedSet {
  int N = 0;
  std::vector<DensityMatrix> gammas;  // gammas[n] on sector n
};

FockDensity zero_fock_density(int modes, int N, Statistics statistics);
FockDensity vacuum_state(int modes, int N, Statistics statistics);
/// State supported on the top sector only.
FockDensity single_sector_state(const DensityMatrix& top, int N);

/// Gamma^(n) = C(N,n) Tr_{n+1..N} Gamma via the occupation-basis fast path.
/// The combinatorial weights are pinned against reduce_via_embedding by the
/// test suite before anything else relies on them.
DensityMatrix reduce(const DensityMatrix& gamma, int n);

/// Normative route: embed the sector into the plain N-fold tensor power,
/// trace out the last N-n factors, compress back. Capacity-capped.
DensityMatrix reduce_via_embedding(const DensityMatrix& gamma, int n);

/// Gamma^(n) = G_n + sum_{m>n} C(m,n) Tr_{n+1..m} G_m.
DensityMatrix fock_reduce(const FockDensity& state, int n);
ReducedSet reduce_all(const FockDensity& state);

/// Inverse of reduce_all through the alternating binomial sums
/// G_n = sum_{j>=0} (-1)^j C(n+j,n) Tr_{n+1..n+j} gamma^(n+j).
/// Does not enforce positivity; blocks with |trace| < 1e-9 are zeroed.
FockDensity reconstruct_blocks(const ReducedSet& reduced);

/// Tr(a*(f_1)...a*(f_n) a(g_1)...a(g_n) Gamma).
Complex correlations(const FockDensity& state,
                     const std::vector<Vector>& creation_list,
                     const std::vector<Vector>& annihilation_list);

struct DictionaryEntry {
  enum class Kind { diagonal, real_part, imag_part };
  int sector = 0;
  int p = 0, q = 0;  // occupation-state indices within the sector basis
  Kind kind = Kind::diagonal;
  std::string label;
};

/// Windowed Hermitian test operators, norm <= 1 each: |p><p|, |p><q| + h.c.
/// and i(|p><q| - h.c.) over occupation states supported inside the window.
struct ObservableDictionary {
  int modes = 0;
  int max_sector = 0;
  Statistics statistics = Statistics::boson;
  int window_center = 0;
  int window_radius = 0;
  std::vector<DictionaryEntry> entries;
};

ObservableDictionary window_dictionary(int modes, int max_sector,
                                       Statistics statistics, int center,
                                       int radius);

double dictionary_pairing(const DictionaryEntry& entry, const Matrix& gamma_n);
Matrix dictionary_matrix(const DictionaryEntry& entry, int sector_dim);
std::vector<double> dictionary_pairings(const ObservableDictionary& dict,
                                        const ReducedSet& reduced);

/// max_K |Tr(K (Gamma1^(n) - Gamma2^(n)))| over the dictionary.
double weak_star_gap(const ReducedSet& a, const ReducedSet& b,
                     const ObservableDictionary& dict);
double weak_star_gap(const FockDensity& a, const FockDensity& b,
                     const ObservableDictionary& dict);

/// sum_n tr(sqrt(H0_n) G_n sqrt(H0_n)), spectral square roots.
double energy_seminorm(const FockDensity& state, const FockOperator& free_op);

/// Diagonal 0/1 projector onto occupation states fully inside the window.
Matrix sector_window_projector(const SectorBasis& basis, int center,
                               int radius);

double binomial(int n, int k);

}  // namespace fockrage
