#pragma once

#include <vector>

#include "fockrage/dynamics.hpp"

namespace fockrage {

/// Precomputed machinery for one (h, w, N, statistics) hierarchy instance.
/// collision[n] maps vec(gamma^(n+1)) to
/// vec((n+1) sum_{j=1..n} Tr_{n+1}([w_{j,n+1}, gamma^(n+1)])) compressed onto
/// sector n. The dressed variant carries the h^{±1/2} conjugations of the
/// Duhamel form; for bounded w the two coincide and the dressed map exists
/// only so the literal form can be exercised.
struct HierarchySetup {
  int N = 0;
  int modes = 0;
  Statistics statistics = Statistics::boson;
  std::vector<SectorBasis> sectors;      // 0..N
  std::vector<Matrix> hamiltonians;      // H_n, 0..N
  std::vector<SpectralData> spectra;     // of H_n
  std::vector<Matrix> collision;         // [0..N-1], D_n^2 x D_{n+1}^2
  std::vector<Matrix> collision_dressed; // same shape; empty unless requested
};

HierarchySetup hierarchy_setup(const Matrix& h, const TwoBodyOperator& w,
                               int N, Statistics statistics,
                               bool build_dressed = false,
                               int sector_cap = kDefaultSectorCap);

/// Right-hand side of the truncated hierarchy:
/// d/dt gamma^(n) = -i([H_n, gamma^(n)] + collision_n(gamma^(n+1))),
/// with gamma^(N+1) = 0.
ReducedSet hierarchy_rhs(const ReducedSet& gammas,
                         const HierarchySetup& setup);

enum class HierarchyMethod { rk4, picard };

struct HierarchyTrajectory {
  std::vector<double> times;       // uniform grid including t = 0
  std::vector<ReducedSet> values;  // one ReducedSet per time
  HierarchyMethod method = HierarchyMethod::rk4;
  double step = 0.0;
  double error_estimate = 0.0;     // Richardson estimate at final time
  double trace_drift = 0.0;        // max |tr gamma^(n)(t) - tr gamma^(n)(0)|
  double hermiticity_drift = 0.0;  // max ||gamma - gamma^dagger||
};

/// Triangular solve: level N by exact spectral conjugation, integrated level
/// n at step/2^(n-1) so every RK4 stage lands on the stored grid of the
/// level above. Picard evaluates the Duhamel form with trapezoid quadrature
/// on a single shared grid. Throws AccuracyError when the Richardson
/// estimate exceeds `tolerance`.
HierarchyTrajectory hierarchy_solve(const ReducedSet& initial,
                                    const HierarchySetup& setup, double T,
                                    double step,
                                    HierarchyMethod method = HierarchyMethod::rk4,
                                    double tolerance = 1e-5);

struct ResidualReport {
  std::vector<double> times;
  // defect[k][n]: Frobenius norm of the Duhamel-form defect at times[k]
  std::vector<std::vector<double>> defect;
  bool dressed = false;
  double max_defect = 0.0;
};

/// Plugs a trajectory (typically reduced exact evolution) into the Duhamel
/// form and reports the per-(n, t) defect under trapezoid quadrature.
ResidualReport hierarchy_residual(const HierarchyTrajectory& trajectory,
                                  const HierarchySetup& setup,
                                  bool dressed_form = false);

/// Reduced matrices of the exact evolution on a uniform grid: the
/// consistency oracle for hierarchy_solve.
HierarchyTrajectory exact_reduced_trajectory(const FockDensity& state,
                                             const std::vector<SpectralData>& spectra,
                                             double T, double step);

}  // namespace fockrage
