#include "fockrage/dynamics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace fockrage {

namespace {

Matrix to_eigenbasis(const Matrix& gamma, const SpectralData& s) {
  return s.eigenvectors.adjoint() * gamma * s.eigenvectors;
}

Matrix from_eigenbasis(const Matrix& gamma_hat, const SpectralData& s) {
  return s.eigenvectors * gamma_hat * s.eigenvectors.adjoint();
}

}  // namespace

SpectralData eigendecompose(const Matrix& hamiltonian, double cluster_tol) {
  require_hermitian(hamiltonian, "eigendecompose");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecompose: eigensolver did not converge");
  }
  SpectralData out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();

  const double scale = std::max(1.0, hamiltonian.norm());
  const double resid = (hamiltonian * out.eigenvectors -
                        out.eigenvectors * out.eigenvalues.asDiagonal())
                           .norm();
  if (resid > 1e-9 * scale) {
    throw NumericError("eigendecompose: residual above tolerance");
  }

  const int dim = out.dim();
  const double range =
      dim > 0 ? out.eigenvalues(dim - 1) - out.eigenvalues(0) : 0.0;
  out.cluster_tol = cluster_tol >= 0.0
                        ? cluster_tol
                        : 1e-9 * std::max(range, 1e-300);
  for (int i = 0; i < dim; ++i) {
    const bool fresh =
        out.clusters.empty() ||
        out.eigenvalues(i) - out.eigenvalues(i - 1) > out.cluster_tol ||
        out.eigenvalues(i) - out.eigenvalues(out.clusters.back().front()) >
            out.cluster_tol;
    if (fresh) {
      out.clusters.push_back({i});
    } else {
      out.clusters.back().push_back(i);
    }
  }
  out.designation.assign(out.clusters.size(), SpectralKind::point);
  return out;
}

std::vector<SpectralData> eigendecompose_fock(const FockOperator& op,
                                              double cluster_tol) {
  std::vector<SpectralData> out;
  out.reserve(op.blocks.size());
  for (const ManyBodyOperator& block : op.blocks) {
    out.push_back(eigendecompose(block.matrix, cluster_tol));
  }
  return out;
}

void designate_lattice_clusters(SpectralData& spectral,
                                const LatticeSpec& lattice, double shift) {
  const double band_lo = shift;
  const double band_hi = shift + 4.0 * std::abs(lattice.hopping);
  std::vector<int> support;
  for (int x = 0; x < lattice.length; ++x) {
    if (std::abs(lattice.potential[x]) > 1e-12) support.push_back(x);
  }
  for (size_t c = 0; c < spectral.clusters.size(); ++c) {
    bool quasi = true;
    for (int idx : spectral.clusters[c]) {
      const double lambda = spectral.eigenvalues(idx);
      if (!(lambda > band_lo && lambda < band_hi)) {
        quasi = false;
        break;
      }
      double weight = 0.0;
      for (int x : support) {
        weight += std::norm(spectral.eigenvectors(x, idx));
      }
      if (weight >= 0.5) {
        quasi = false;
        break;
      }
    }
    spectral.designation[c] =
        quasi ? SpectralKind::quasi_continuum : SpectralKind::point;
  }
}

std::vector<int> quasi_continuum_clusters(const SpectralData& spectral) {
  std::vector<int> out;
  for (size_t c = 0; c < spectral.designation.size(); ++c) {
    if (spectral.designation[c] == SpectralKind::quasi_continuum) {
      out.push_back(static_cast<int>(c));
    }
  }
  return out;
}

Complex WindowFunction::kappa(double x) const {
  auto box = [](double y) -> Complex {
    if (std::abs(y) < 1e-8) {
      return Complex(1.0 - y * y / 6.0, -y / 2.0);
    }
    return (1.0 - std::exp(Complex(0.0, -y))) / Complex(0.0, y);
  };
  switch (kind) {
    case Kind::box:
      return box(x);
    case Kind::triangle: {
      const Complex b = box(x);
      return b * b;
    }
    case Kind::gaussian:
      return Complex(std::exp(-0.5 * width * width * x * x), 0.0);
  }
  return Complex(1.0, 0.0);
}

double WindowFunction::chi(double u) const {
  switch (kind) {
    case Kind::box:
      return (u >= 0.0 && u <= 1.0) ? 1.0 : 0.0;
    case Kind::triangle:
      return (u >= 0.0 && u <= 2.0) ? 1.0 - std::abs(u - 1.0) : 0.0;
    case Kind::gaussian:
      return std::exp(-0.5 * u * u / (width * width)) /
             (width * std::sqrt(2.0 * M_PI));
  }
  return 0.0;
}

std::pair<double, double> WindowFunction::support() const {
  switch (kind) {
    case Kind::box:
      return {0.0, 1.0};
    case Kind::triangle:
      return {0.0, 2.0};
    case Kind::gaussian:
      return {-8.0 * width, 8.0 * width};
  }
  return {0.0, 1.0};
}

Matrix evolve(const Matrix& gamma, const SpectralData& s, double t) {
  if (gamma.rows() != s.dim() || gamma.cols() != s.dim()) {
    throw InputError("evolve: state and spectral data disagree in shape");
  }
  Vector phases(s.dim());
  for (int j = 0; j < s.dim(); ++j) {
    phases(j) = std::exp(Complex(0.0, -t * s.eigenvalues(j)));
  }
  const Matrix hat =
      to_eigenbasis(gamma, s).cwiseProduct(phases * phases.adjoint());
  return from_eigenbasis(hat, s);
}

DensityMatrix evolve(const DensityMatrix& gamma, const SpectralData& s,
                     double t) {
  return DensityMatrix{gamma.sector, evolve(gamma.matrix, s, t)};
}

FockDensity evolve(const FockDensity& state,
                   const std::vector<SpectralData>& spectra, double t) {
  if (spectra.size() < state.blocks.size()) {
    throw InputError("evolve: missing spectral data for some block");
  }
  FockDensity out = state;
  for (int n = 0; n <= state.N; ++n) {
    out.blocks[n].matrix = evolve(state.blocks[n].matrix, spectra[n], t);
  }
  return out;
}

Matrix ergodic_mean(const Matrix& gamma, const SpectralData& s, double big_t,
                    const WindowFunction& chi) {
  if (!(big_t > 0.0)) throw InputError("ergodic_mean: T must be positive");
  if (gamma.rows() != s.dim() || gamma.cols() != s.dim()) {
    throw InputError("ergodic_mean: state and spectral data disagree in shape");
  }
  Matrix hat = to_eigenbasis(gamma, s);
  for (int j = 0; j < s.dim(); ++j) {
    for (int k = 0; k < s.dim(); ++k) {
      hat(j, k) *= chi.kappa((s.eigenvalues(j) - s.eigenvalues(k)) * big_t);
    }
  }
  return from_eigenbasis(hat, s);
}

DensityMatrix ergodic_mean(const DensityMatrix& gamma, const SpectralData& s,
                           double big_t, const WindowFunction& chi) {
  return DensityMatrix{gamma.sector, ergodic_mean(gamma.matrix, s, big_t, chi)};
}

FockDensity ergodic_mean(const FockDensity& state,
                         const std::vector<SpectralData>& spectra,
                         double big_t, const WindowFunction& chi) {
  if (spectra.size() < state.blocks.size()) {
    throw InputError("ergodic_mean: missing spectral data for some block");
  }
  FockDensity out = state;
  for (int n = 0; n <= state.N; ++n) {
    out.blocks[n].matrix =
        ergodic_mean(state.blocks[n].matrix, spectra[n], big_t, chi);
  }
  return out;
}

Matrix ergodic_mean_quadrature(const Matrix& gamma, const SpectralData& s,
                               double big_t, int steps,
                               const WindowFunction& chi) {
  if (!(big_t > 0.0)) {
    throw InputError("ergodic_mean_quadrature: T must be positive");
  }
  if (steps < 2) throw InputError("ergodic_mean_quadrature: need >= 2 steps");
  const auto [lo, hi] = chi.support();
  const double a = lo * big_t;
  const double b = hi * big_t;
  const double delta = (b - a) / steps;
  Matrix acc = Matrix::Zero(gamma.rows(), gamma.cols());
  for (int k = 0; k <= steps; ++k) {
    const double t = a + delta * k;
    const double weight = (k == 0 || k == steps) ? 0.5 : 1.0;
    const double window = chi.chi(t / big_t) / big_t;
    if (window == 0.0) continue;
    acc += (weight * delta * window) * evolve(gamma, s, t);
  }
  return acc;
}

Matrix dephase(const Matrix& gamma, const SpectralData& s) {
  if (gamma.rows() != s.dim() || gamma.cols() != s.dim()) {
    throw InputError("dephase: state and spectral data disagree in shape");
  }
  Matrix hat = to_eigenbasis(gamma, s);
  Eigen::VectorXi cluster_of(s.dim());
  for (size_t c = 0; c < s.clusters.size(); ++c) {
    for (int idx : s.clusters[c]) cluster_of(idx) = static_cast<int>(c);
  }
  for (int j = 0; j < s.dim(); ++j) {
    for (int k = 0; k < s.dim(); ++k) {
      if (cluster_of(j) != cluster_of(k)) hat(j, k) = Complex(0.0, 0.0);
    }
  }
  return from_eigenbasis(hat, s);
}

DensityMatrix dephase(const DensityMatrix& gamma, const SpectralData& s) {
  return DensityMatrix{gamma.sector, dephase(gamma.matrix, s)};
}

FockDensity dephase(const FockDensity& state,
                    const std::vector<SpectralData>& spectra) {
  if (spectra.size() < state.blocks.size()) {
    throw InputError("dephase: missing spectral data for some block");
  }
  FockDensity out = state;
  for (int n = 0; n <= state.N; ++n) {
    out.blocks[n].matrix = dephase(state.blocks[n].matrix, spectra[n]);
  }
  return out;
}

ShiftBoundResult conjugation_shift_bound(const Matrix& gamma,
                                         const SpectralData& s, double shift,
                                         double big_t) {
  if (!(big_t > 0.0)) {
    throw InputError("conjugation_shift_bound: T must be positive");
  }
  const WindowFunction box{};
  Matrix hat = to_eigenbasis(gamma, s);
  for (int j = 0; j < s.dim(); ++j) {
    for (int k = 0; k < s.dim(); ++k) {
      const double x = s.eigenvalues(j) - s.eigenvalues(k);
      hat(j, k) *= box.kappa(x * big_t) *
                   (std::exp(Complex(0.0, -shift * x)) - 1.0);
    }
  }
  ShiftBoundResult out;
  // trace norm is unitarily invariant: evaluate in the eigenbasis
  out.lhs = trace_norm_hermitian(hat);
  out.bound = 2.0 * std::abs(shift) * std::abs(gamma.trace().real()) / big_t;
  out.pass = out.lhs <= out.bound + 1e-10;
  return out;
}

RageStatistic classic_rage_statistic(const Vector& x, const Matrix& k_obs,
                                     const SpectralData& s,
                                     const std::vector<int>& selected_clusters,
                                     double big_t, const WindowFunction& chi) {
  if (!(big_t > 0.0)) {
    throw InputError("classic_rage_statistic: T must be positive");
  }
  if (x.size() != s.dim()) {
    throw InputError("classic_rage_statistic: vector dimension mismatch");
  }
  std::vector<int> indices;
  for (int c : selected_clusters) {
    if (c < 0 || c >= static_cast<int>(s.clusters.size())) {
      throw InputError("classic_rage_statistic: cluster index out of range");
    }
    for (int idx : s.clusters[c]) indices.push_back(idx);
  }
  if (indices.empty()) return RageStatistic{0.0, true};

  const int m = static_cast<int>(indices.size());
  Vector coeff(m);
  Matrix columns(s.dim(), m);
  for (int j = 0; j < m; ++j) {
    coeff(j) = s.eigenvectors.col(indices[j]).adjoint() * x;
    columns.col(j) = k_obs * s.eigenvectors.col(indices[j]);
  }
  const Matrix gram = columns.adjoint() * columns;
  double value = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const double gap =
          s.eigenvalues(indices[j]) - s.eigenvalues(indices[k]);
      const Complex term =
          coeff(j) * std::conj(coeff(k)) * gram(k, j) * chi.kappa(gap * big_t);
      value += term.real();
    }
  }
  return RageStatistic{value, false};
}

}  // namespace fockrage
