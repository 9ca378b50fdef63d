#pragma once

#include <vector>

#include "fockrage/reduced.hpp"

namespace fockrage {

enum class SpectralKind { point, quasi_continuum };

struct SpectralData {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // unitary columns
  std::vector<std::vector<int>> clusters;  // partition of indices, ordered
  std::vector<SpectralKind> designation;   // per cluster
  double cluster_tol = 0.0;
  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Dense Hermitian eigendecomposition with gap clustering. A negative
/// cluster_tol selects the default 1e-9 * spectral range. Clusters keep both
/// gap and total spread below cluster_tol; all clusters start out `point`.
SpectralData eigendecompose(const Matrix& hamiltonian, double cluster_tol = -1.0);
std::vector<SpectralData> eigendecompose_fock(const FockOperator& op,
                                              double cluster_tol = -1.0);

/// Marks clusters quasi-continuum when every member eigenvector has its
/// eigenvalue strictly inside the free band (shift + [0, 4|hopping|]) and
/// weight below 0.5 on the potential support.
void designate_lattice_clusters(SpectralData& spectral,
                                const LatticeSpec& lattice, double shift);
std::vector<int> quasi_continuum_clusters(const SpectralData& spectral);

/// Nonnegative averaging window with unit integral.
struct WindowFunction {
  enum class Kind { box, triangle, gaussian };
  Kind kind = Kind::box;
  double width = 1.0;  // gaussian sigma in units of T

  /// kappa(x) = integral chi(u) exp(-i x u) du; kappa(0) = 1.
  Complex kappa(double x) const;
  double chi(double u) const;
  /// Support in units of T (gaussian truncated at 8 sigma).
  std::pair<double, double> support() const;
};

Matrix evolve(const Matrix& gamma, const SpectralData& spectral, double t);
DensityMatrix evolve(const DensityMatrix& gamma, const SpectralData& spectral,
                     double t);
FockDensity evolve(const FockDensity& state,
                   const std::vector<SpectralData>& spectra, double t);

/// Ergodic mean in spectral closed form: entry (j,k) of the eigenbasis
/// representation is multiplied by kappa((lambda_j - lambda_k) T).
Matrix ergodic_mean(const Matrix& gamma, const SpectralData& spectral,
                    double big_t, const WindowFunction& chi = {});
DensityMatrix ergodic_mean(const DensityMatrix& gamma,
                           const SpectralData& spectral, double big_t,
                           const WindowFunction& chi = {});
FockDensity ergodic_mean(const FockDensity& state,
                         const std::vector<SpectralData>& spectra,
                         double big_t, const WindowFunction& chi = {});

/// Cross-check path: composite trapezoid over the window support.
Matrix ergodic_mean_quadrature(const Matrix& gamma,
                               const SpectralData& spectral, double big_t,
                               int steps, const WindowFunction& chi = {});

/// sum_c P_c gamma P_c over eigenvalue clusters: the exact T -> infinity
/// limit of the ergodic mean at finite dimension.
Matrix dephase(const Matrix& gamma, const SpectralData& spectral);
DensityMatrix dephase(const DensityMatrix& gamma, const SpectralData& spectral);
FockDensity dephase(const FockDensity& state,
                    const std::vector<SpectralData>& spectra);

struct ShiftBoundResult {
  double lhs = 0.0;    // || e^{-isH} M(T) e^{isH} - M(T) ||_1
  double bound = 0.0;  // 2|s| tr(gamma) / T
  bool pass = false;
};
ShiftBoundResult conjugation_shift_bound(const Matrix& gamma,
                                         const SpectralData& spectral,
                                         double s, double big_t);

struct RageStatistic {
  double value = 0.0;
  bool empty_selection = false;
};

/// (1/T) int_0^T ||K P_sel e^{-itH} x||^2 dt in spectral closed form.
RageStatistic classic_rage_statistic(const Vector& x, const Matrix& k_obs,
                                     const SpectralData& spectral,
                                     const std::vector<int>& selected_clusters,
                                     double big_t,
                                     const WindowFunction& chi = {});

}  // namespace fockrage
