#include "fockrage/bbgky.hpp"

#include <cmath>
#include <string>

namespace fockrage {

namespace {

int pow2(int k) { return 1 << k; }

// Partial trace over the last tensor factor of the rank-one |p><q|,
// both vectors living on d^n x d.
Matrix rank_one_trace_last(const Vector& p, const Vector& q, int keep_dim,
                           int d) {
  Matrix out = Matrix::Zero(keep_dim, keep_dim);
  for (int a = 0; a < keep_dim; ++a) {
    for (int b = 0; b < keep_dim; ++b) {
      Complex acc(0.0, 0.0);
      for (int t = 0; t < d; ++t) {
        acc += p(a * d + t) * std::conj(q(b * d + t));
      }
      out(a, b) = acc;
    }
  }
  return out;
}

// Collision superoperator for one level: gamma^(n+1) (vectorized,
// column-major) -> compressed (n+1) sum_j Tr_last([W_j, E gamma E*]).
// When `dress` is set, W_j is replaced by hs^{-1} W_j hs^{-1} and the state
// columns by hs u with hs = sqrt(h) on the traced factor.
Matrix build_collision_map(const SectorBasis& lower, const SectorBasis& upper,
                           const TwoBodyOperator& w, const Matrix& h,
                           bool dress) {
  const int n = lower.particles;
  const int d = lower.modes;
  const int keep_dim = static_cast<int>(std::llround(std::pow(double(d), n)));
  const SparseMatrix embed = embedding_isometry(upper);
  const SparseMatrix compress = embedding_isometry(lower);

  std::vector<SparseMatrix> couplers;
  couplers.reserve(n);
  for (int j = 0; j < n; ++j) {
    couplers.push_back(two_site_operator(w.matrix, n + 1, j, n, d));
  }
  SparseMatrix dress_last;
  if (dress) {
    const Matrix hs = hermitian_sqrt(h);
    const Matrix hs_inv = hermitian_inv_sqrt(h);
    dress_last = one_site_operator(hs, n + 1, n, d);
    const SparseMatrix undress = one_site_operator(hs_inv, n + 1, n, d);
    for (SparseMatrix& c : couplers) {
      c = SparseMatrix(undress * SparseMatrix(c * undress));
    }
  }

  const int lower_dim = lower.dim();
  const int upper_dim = upper.dim();
  Matrix map = Matrix::Zero(lower_dim * lower_dim, upper_dim * upper_dim);
  const Matrix embed_dense = Matrix(embed);
  for (int c = 0; c < upper_dim; ++c) {
    Vector u = embed_dense.col(c);
    if (dress) u = dress_last * u;
    for (int e = 0; e < upper_dim; ++e) {
      Vector v = embed_dense.col(e);
      if (dress) v = dress_last * v;
      Matrix traced = Matrix::Zero(keep_dim, keep_dim);
      for (const SparseMatrix& coupler : couplers) {
        const Vector wu = coupler * u;
        const Vector wv = coupler * v;
        traced += rank_one_trace_last(wu, v, keep_dim, d);
        traced -= rank_one_trace_last(u, wv, keep_dim, d);
      }
      Matrix compressed =
          double(n + 1) *
          Matrix(Matrix(compress).adjoint() * traced * Matrix(compress));
      map.col(c + upper_dim * e) =
          Eigen::Map<Vector>(compressed.data(), lower_dim * lower_dim);
    }
  }
  return map;
}

Matrix apply_collision(const Matrix& map, const Matrix& upper_gamma,
                       int lower_dim) {
  const Eigen::Map<const Vector> vec(upper_gamma.data(), upper_gamma.size());
  Vector out = map * vec;
  return Eigen::Map<Matrix>(out.data(), lower_dim, lower_dim);
}

}  // namespace

HierarchySetup hierarchy_setup(const Matrix& h, const TwoBodyOperator& w,
                               int N, Statistics statistics,
                               bool build_dressed, int sector_cap) {
  HierarchySetup setup;
  setup.N = N;
  setup.modes = static_cast<int>(h.rows());
  setup.statistics = statistics;
  FockOperator op = second_quantize(h, w, N, statistics, sector_cap);
  setup.sectors.reserve(N + 1);
  setup.hamiltonians.reserve(N + 1);
  for (int n = 0; n <= N; ++n) {
    setup.sectors.push_back(op.blocks[n].sector);
    setup.hamiltonians.push_back(op.blocks[n].matrix);
  }
  setup.spectra = eigendecompose_fock(op);
  setup.collision.reserve(N);
  for (int n = 0; n < N; ++n) {
    setup.collision.push_back(build_collision_map(
        setup.sectors[n], setup.sectors[n + 1], w, h, false));
  }
  if (build_dressed) {
    setup.collision_dressed.reserve(N);
    for (int n = 0; n < N; ++n) {
      setup.collision_dressed.push_back(build_collision_map(
          setup.sectors[n], setup.sectors[n + 1], w, h, true));
    }
  }
  return setup;
}

ReducedSet hierarchy_rhs(const ReducedSet& gammas,
                         const HierarchySetup& setup) {
  if (gammas.N != setup.N ||
      static_cast<int>(gammas.gammas.size()) != setup.N + 1) {
    throw InputError(
        "hierarchy_rhs: reduced set does not carry levels 0..N (missing "
        "gamma^(n+1) input)");
  }
  ReducedSet out = gammas;
  for (int n = 0; n <= setup.N; ++n) {
    const Matrix& gamma_n = gammas.gammas[n].matrix;
    if (gamma_n.rows() != setup.sectors[n].dim()) {
      throw InputError("hierarchy_rhs: level dimension mismatch");
    }
    Matrix acc = setup.hamiltonians[n] * gamma_n -
                 gamma_n * setup.hamiltonians[n];
    if (n < setup.N) {
      acc += apply_collision(setup.collision[n], gammas.gammas[n + 1].matrix,
                             setup.sectors[n].dim());
    }
    out.gammas[n].matrix = Complex(0.0, -1.0) * acc;
  }
  return out;
}

namespace {

struct SolveOutput {
  std::vector<double> times;
  std::vector<ReducedSet> values;
  double trace_drift = 0.0;
  double hermiticity_drift = 0.0;
};

// One full triangular pass at the given coarse step.
SolveOutput solve_once(const ReducedSet& initial, const HierarchySetup& setup,
                       double T, double step, HierarchyMethod method) {
  const int N = setup.N;
  const int coarse_steps = std::max(1, static_cast<int>(std::llround(T / step)));
  const double coarse_step = T / coarse_steps;

  // Per-level trajectories; level n (1 <= n <= N-1) lives on a grid of
  // spacing coarse_step / 2^(n-1) for RK4, or the coarse grid for Picard.
  std::vector<std::vector<Matrix>> levels(N + 1);

  // level N: exact spectral conjugation, also used as forcing below
  auto exact_top = [&](double t) {
    return evolve(initial.gammas[N].matrix, setup.spectra[N], t);
  };

  for (int n = N - 1; n >= 1; --n) {
    const int lower_dim = setup.sectors[n].dim();
    const Matrix& h_n = setup.hamiltonians[n];
    if (setup.collision[n].norm() == 0.0) {
      // no coupling to the level above: the conjugation path is exact
      const int refine = method == HierarchyMethod::rk4 ? pow2(n - 1) : 1;
      const int steps_n = coarse_steps * refine;
      std::vector<Matrix>& traj = levels[n];
      traj.resize(steps_n + 1);
      for (int k = 0; k <= steps_n; ++k) {
        traj[k] = evolve(initial.gammas[n].matrix, setup.spectra[n],
                         T * k / steps_n);
      }
      continue;
    }
    if (method == HierarchyMethod::rk4) {
      const int refine = pow2(n - 1);
      const int steps_n = coarse_steps * refine;
      const double h_step = T / steps_n;
      // forcing from level n+1 at half-grid resolution
      auto upper_at = [&](int half_index) -> Matrix {
        const double t = 0.5 * h_step * half_index;
        if (n + 1 == N) return exact_top(t);
        return levels[n + 1][half_index];
      };
      std::vector<Matrix>& traj = levels[n];
      traj.resize(steps_n + 1);
      traj[0] = initial.gammas[n].matrix;
      Matrix forcing_0 = apply_collision(setup.collision[n], upper_at(0),
                                         lower_dim);
      for (int k = 0; k < steps_n; ++k) {
        const Matrix& g = traj[k];
        const Matrix forcing_half = apply_collision(
            setup.collision[n], upper_at(2 * k + 1), lower_dim);
        const Matrix forcing_1 = apply_collision(
            setup.collision[n], upper_at(2 * k + 2), lower_dim);
        auto rhs = [&](const Matrix& x, const Matrix& forcing) {
          return Complex(0.0, -1.0) * (h_n * x - x * h_n + forcing);
        };
        const Matrix k1 = rhs(g, forcing_0);
        const Matrix k2 = rhs(g + 0.5 * h_step * k1, forcing_half);
        const Matrix k3 = rhs(g + 0.5 * h_step * k2, forcing_half);
        const Matrix k4 = rhs(g + h_step * k3, forcing_1);
        traj[k + 1] = g + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        forcing_0 = forcing_1;
      }
    } else {
      // Picard / Duhamel with trapezoid accumulation in the
      // interaction picture, single coarse grid.
      auto upper_at = [&](int index) -> Matrix {
        const double t = coarse_step * index;
        if (n + 1 == N) return exact_top(t);
        return levels[n + 1][index];
      };
      std::vector<Matrix>& traj = levels[n];
      traj.resize(coarse_steps + 1);
      traj[0] = initial.gammas[n].matrix;
      Matrix accum = Matrix::Zero(lower_dim, lower_dim);
      Matrix g_prev = evolve(
          apply_collision(setup.collision[n], upper_at(0), lower_dim),
          setup.spectra[n], 0.0);
      for (int k = 1; k <= coarse_steps; ++k) {
        const double t = coarse_step * k;
        const Matrix g_here =
            evolve(apply_collision(setup.collision[n], upper_at(k), lower_dim),
                   setup.spectra[n], -t);
        accum += (coarse_step / 2.0) * (g_prev + g_here);
        g_prev = g_here;
        traj[k] = evolve(
            Matrix(initial.gammas[n].matrix - Complex(0.0, 1.0) * accum),
            setup.spectra[n], t);
      }
    }
  }

  SolveOutput out;
  out.times.reserve(coarse_steps + 1);
  out.values.reserve(coarse_steps + 1);
  for (int k = 0; k <= coarse_steps; ++k) {
    const double t = coarse_step * k;
    ReducedSet snapshot;
    snapshot.N = N;
    snapshot.gammas.reserve(N + 1);
    for (int n = 0; n <= N; ++n) {
      Matrix value;
      if (n == 0) {
        value = initial.gammas[0].matrix;  // no collision term below n = 1
      } else if (n == N) {
        value = exact_top(t);
      } else if (method == HierarchyMethod::rk4) {
        value = levels[n][k * pow2(n - 1)];
      } else {
        value = levels[n][k];
      }
      snapshot.gammas.push_back(
          DensityMatrix{setup.sectors[n], std::move(value)});
    }
    out.times.push_back(t);
    out.values.push_back(std::move(snapshot));
  }

  for (int n = 0; n <= N; ++n) {
    const double trace0 = out.values.front().gammas[n].matrix.trace().real();
    for (const ReducedSet& rs : out.values) {
      const Matrix& g = rs.gammas[n].matrix;
      out.trace_drift =
          std::max(out.trace_drift, std::abs(g.trace().real() - trace0));
      out.hermiticity_drift =
          std::max(out.hermiticity_drift, (g - g.adjoint()).norm());
    }
  }
  return out;
}

}  // namespace

HierarchyTrajectory hierarchy_solve(const ReducedSet& initial,
                                    const HierarchySetup& setup, double T,
                                    double step, HierarchyMethod method,
                                    double tolerance) {
  if (!(T > 0.0) || !(step > 0.0) || !std::isfinite(T) || !std::isfinite(step)) {
    throw InputError("hierarchy_solve: T and step must be positive and finite");
  }
  if (static_cast<int>(initial.gammas.size()) != setup.N + 1) {
    throw InputError("hierarchy_solve: initial set must carry levels 0..N");
  }
  SolveOutput fine = solve_once(initial, setup, T, step, method);
  SolveOutput coarse = solve_once(initial, setup, T, 2.0 * step, method);

  double diff = 0.0;
  for (int n = 0; n <= setup.N; ++n) {
    diff = std::max(diff, (fine.values.back().gammas[n].matrix -
                           coarse.values.back().gammas[n].matrix)
                              .norm());
  }
  const double order = method == HierarchyMethod::rk4 ? 4.0 : 2.0;
  const double estimate = diff / (std::pow(2.0, order) - 1.0);
  if (estimate > tolerance) {
    const double suggested =
        0.9 * step * std::pow(tolerance / std::max(estimate, 1e-300),
                              1.0 / order);
    throw AccuracyError(
        "hierarchy_solve: error estimate " + std::to_string(estimate) +
            " above tolerance " + std::to_string(tolerance) +
            "; suggested step " + std::to_string(suggested),
        suggested);
  }

  HierarchyTrajectory out;
  out.times = std::move(fine.times);
  out.values = std::move(fine.values);
  out.method = method;
  out.step = step;
  out.error_estimate = estimate;
  out.trace_drift = fine.trace_drift;
  out.hermiticity_drift = fine.hermiticity_drift;
  return out;
}

ResidualReport hierarchy_residual(const HierarchyTrajectory& trajectory,
                                  const HierarchySetup& setup,
                                  bool dressed_form) {
  if (trajectory.values.empty()) {
    throw InputError("hierarchy_residual: empty trajectory");
  }
  const std::vector<Matrix>& maps =
      dressed_form ? setup.collision_dressed : setup.collision;
  if (dressed_form && maps.empty()) {
    throw InputError(
        "hierarchy_residual: setup built without the dressed collision maps");
  }
  const int N = setup.N;
  const size_t count = trajectory.times.size();
  ResidualReport report;
  report.times = trajectory.times;
  report.dressed = dressed_form;
  report.defect.assign(count, std::vector<double>(N + 1, 0.0));

  for (int n = 0; n <= N; ++n) {
    const int dim = setup.sectors[n].dim();
    const Matrix& gamma0 = trajectory.values.front().gammas[n].matrix;
    Matrix accum = Matrix::Zero(dim, dim);
    Matrix g_prev;
    for (size_t k = 0; k < count; ++k) {
      const double t = trajectory.times[k];
      Matrix forcing = Matrix::Zero(dim, dim);
      if (n < N) {
        forcing = apply_collision(
            maps[n], trajectory.values[k].gammas[n + 1].matrix, dim);
      }
      const Matrix g_here = evolve(forcing, setup.spectra[n], -t);
      if (k > 0) {
        const double delta = trajectory.times[k] - trajectory.times[k - 1];
        accum += (delta / 2.0) * (g_prev + g_here);
      }
      g_prev = g_here;
      const Matrix duhamel = evolve(
          Matrix(gamma0 - Complex(0.0, 1.0) * accum), setup.spectra[n], t);
      const double defect =
          (trajectory.values[k].gammas[n].matrix - duhamel).norm();
      report.defect[k][n] = defect;
      report.max_defect = std::max(report.max_defect, defect);
    }
  }
  return report;
}

HierarchyTrajectory exact_reduced_trajectory(
    const FockDensity& state, const std::vector<SpectralData>& spectra,
    double T, double step) {
  if (!(T > 0.0) || !(step > 0.0)) {
    throw InputError("exact_reduced_trajectory: T and step must be positive");
  }
  const int steps = std::max(1, static_cast<int>(std::llround(T / step)));
  const double delta = T / steps;
  HierarchyTrajectory out;
  out.method = HierarchyMethod::rk4;
  out.step = delta;
  out.times.reserve(steps + 1);
  out.values.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = delta * k;
    out.times.push_back(t);
    out.values.push_back(reduce_all(evolve(state, spectra, t)));
  }
  return out;
}

}  // namespace fockrage
