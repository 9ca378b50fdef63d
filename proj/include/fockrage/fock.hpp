#pragma once

#include <unordered_map>
#include <vector>

#include "fockrage/onebody.hpp"

namespace fockrage {

enum class Statistics { boson, fermion };

/// n-particle occupation basis over d modes. States are ordered
/// lexicographically descending on the occupation vector; this order is
/// shared by every module that touches sector coordinates.
class SectorBasis {
 public:
  SectorBasis() = default;
  SectorBasis(int modes, int particles, Statistics statistics,
              std::vector<std::vector<int>> states);

  int modes = 0;
  int particles = 0;
  Statistics statistics = Statistics::boson;
  std::vector<std::vector<int>> states;

  int dim() const { return static_cast<int>(states.size()); }
  /// Position of an occupation vector, -1 if not in the sector.
  int index_of(const std::vector<int>& occ) const;

 private:
  struct OccHash {
    size_t operator()(const std::vector<int>& v) const noexcept {
      size_t h = 1469598103934665603ull;
      for (int x : v) {
        h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull;
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  std::unordered_map<std::vector<int>, int, OccHash> index_;
};

SectorBasis sector_basis(int modes, int particles, Statistics statistics);
std::vector<SectorBasis> all_sectors(int modes, int N, Statistics statistics);

/// Ladder-operator mode rules. Both mutate `occ` and return the amplitude
/// (0 when the result vanishes). Fermions use the prefix-sum sign
/// (-1)^(sum_{q<p} n_q), i.e. |occ> = a*_{i1}...a*_{ik}|vac> with modes
/// ascending left to right.
double create_mode(std::vector<int>& occ, int p, Statistics statistics);
double annihilate_mode(std::vector<int>& occ, int p, Statistics statistics);

/// a*(f) = sum_p f_p a*_p as a matrix from `sector` (n particles) to the
/// (n+1)-particle sector.
Matrix creation_op(const Vector& f, const SectorBasis& sector);
/// a(f) = sum_p conj(f_p) a_p, from `sector` to the (n-1)-particle sector.
Matrix annihilation_op(const Vector& f, const SectorBasis& sector);

struct ManyBodyOperator {
  SectorBasis sector;
  Matrix matrix;  // dim x dim Hermitian
};

/// Block operator 0 (+) H_1 (+) ... (+) H_N on the truncated Fock space.
struct FockOperator {
  int N = 0;
  std::vector<ManyBodyOperator> blocks;  // blocks[n] acts on sector n
};

inline constexpr int kDefaultSectorCap = 4096;
inline constexpr int kLiftTensorCap = 4096;

/// Isometry from the sector onto the plain n-fold tensor power (d^n rows),
/// columns are the normalized (anti)symmetrized product vectors.
SparseMatrix embedding_isometry(const SectorBasis& sector);

/// Sector coordinates of the (anti)symmetrized product of one-particle
/// factors, unnormalized: U^dagger (f_1 x ... x f_n).
Vector compress_product(const SectorBasis& sector,
                        const std::vector<Vector>& factors);

/// a on tensor factor `site` of an n-fold product space.
SparseMatrix one_site_operator(const Matrix& a, int n_factors, int site,
                               int modes);
/// w on tensor factors (site_j, site_l); w lives on the ordered-pair basis.
SparseMatrix two_site_operator(const SparseMatrix& w, int n_factors,
                               int site_j, int site_l, int modes);

/// sum_j h_j + sum_{j<l} w_{jl} on the plain tensor power d^n.
SparseMatrix full_hamiltonian(const Matrix& h, const TwoBodyOperator& w,
                              int n_particles);
/// W_n = sum_{j <= n < l} w_{jl} on the plain tensor power d^N.
SparseMatrix interaction_coupling(const TwoBodyOperator& w, int N, int n);
/// || H_N - H_n x 1 - 1 x H_{N-n} - W_n ||_F on the tensor power.
double split_interaction_residual(const SparseMatrix& h_total,
                                  const SparseMatrix& h_first,
                                  const SparseMatrix& h_rest,
                                  const SparseMatrix& coupling);

TwoBodyOperator zero_interaction(int modes);

/// Dense-tensor-power construction of H_n compressed onto the sector.
/// Oracle route: independent of the ladder-operator construction.
ManyBodyOperator lift_first_quantized(const Matrix& h,
                                      const TwoBodyOperator& w,
                                      int n_particles, Statistics statistics);

/// H_n = sum_pq h_pq a*_p a_q + 1/2 sum_pqrs w_(pq),(rs) a*_p a*_q a_s a_r
/// restricted to sector n; H_0 = 0 and H_1 = h.
FockOperator second_quantize(const Matrix& h, const TwoBodyOperator& w, int N,
                             Statistics statistics,
                             int sector_cap = kDefaultSectorCap);

}  // namespace fockrage
