#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fockrage/common.hpp"

namespace fockrage {

/// 1D open-boundary lattice: `length` sites, nearest-neighbor hopping,
/// per-site potential.
struct LatticeSpec {
  int length = 0;
  double hopping = 1.0;
  std::vector<double> potential;  // size == length
};

struct OneBodyOperator {
  int dim = 0;
  Matrix matrix;       // dim x dim Hermitian
  double shift = 0.0;  // cumulative additive constant applied so far
};

/// Interaction on the ordered-pair tensor basis, index (x1,x2) -> x1*d + x2.
/// Lattice profiles are multiplication operators, hence diagonal; the matrix
/// is stored sparse.
struct TwoBodyOperator {
  int modes = 0;  // d
  SparseMatrix matrix;  // d^2 x d^2 Hermitian
  bool exchange_symmetric = false;
  int dim() const { return modes * modes; }
};

struct InteractionProfile {
  enum class Kind { contact, exponential };
  Kind kind = Kind::contact;
  double strength = 0.0;  // g
  double range = 1.0;     // a, exponential profile only
};

/// Tridiagonal lattice kinetic+potential operator: diagonal 2|hopping| +
/// potential[x], off-diagonal -hopping. No spectral shift applied.
OneBodyOperator build_lattice_one_body(const LatticeSpec& spec);

/// h + e*Id with e chosen so the smallest eigenvalue equals 1 + margin.
OneBodyOperator shift_spectrum(const OneBodyOperator& h, double margin);

/// Diagonal pair interaction w(x1 - x2) for an even profile.
TwoBodyOperator build_pair_interaction(const LatticeSpec& spec,
                                       const InteractionProfile& profile);

/// Wrap a dense Hermitian pair matrix (tests, generic interactions).
TwoBodyOperator two_body_from_dense(int modes, const Matrix& pair_matrix);

/// Diagonal 0/1 projector onto sites within `radius` of `center`.
Matrix window_projector(int length, int center, int radius);

/// Swap of the two tensor factors on the ordered-pair basis.
SparseMatrix pair_swap(int modes);

struct WindowSingularValues {
  std::string label;
  RealVector singular_values;  // descending
  // (rank r, sum of singular values with index >= r)
  std::vector<std::pair<int, double>> tail_mass;
};

/// Singular values of (K x 1 + 1 x K) (h1+h2)^{-1/2} w (h1+h2)^{-1/2} for
/// each window projector K. Illustrates the interaction-decay mechanism
/// that lets an escaping particle decouple; requires a shifted h > 1.
std::vector<WindowSingularValues> hyp_w2_diagnostic(
    const OneBodyOperator& h, const TwoBodyOperator& w,
    const std::vector<Matrix>& windows,
    const std::vector<int>& tail_ranks = {});

}  // namespace fockrage
