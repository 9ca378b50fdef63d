#include "fockrage/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace fockrage {

namespace {

void enumerate_descending(int modes, int particles, int max_per_mode,
                          std::vector<int>& occ, int mode,
                          std::vector<std::vector<int>>& out) {
  if (mode == modes) {
    if (particles == 0) out.push_back(occ);
    return;
  }
  const int top = std::min(particles, max_per_mode);
  for (int k = top; k >= 0; --k) {
    occ[mode] = k;
    enumerate_descending(modes, particles - k, max_per_mode, occ, mode + 1,
                         out);
  }
  occ[mode] = 0;
}

int pow_int(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Ascending mode list with multiplicities, e.g. (2,0,1) -> [0,0,2].
std::vector<int> mode_list(const std::vector<int>& occ) {
  std::vector<int> modes;
  for (int p = 0; p < static_cast<int>(occ.size()); ++p) {
    for (int c = 0; c < occ[p]; ++c) modes.push_back(p);
  }
  return modes;
}

int inversion_parity(const std::vector<int>& tuple) {
  int inv = 0;
  for (size_t i = 0; i < tuple.size(); ++i) {
    for (size_t j = i + 1; j < tuple.size(); ++j) {
      if (tuple[i] > tuple[j]) ++inv;
    }
  }
  return inv % 2;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

SectorBasis::SectorBasis(int m, int p, Statistics s,
                         std::vector<std::vector<int>> st)
    : modes(m), particles(p), statistics(s), states(std::move(st)) {
  index_.reserve(states.size());
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    index_.emplace(states[i], i);
  }
}

int SectorBasis::index_of(const std::vector<int>& occ) const {
  auto it = index_.find(occ);
  return it == index_.end() ? -1 : it->second;
}

SectorBasis sector_basis(int modes, int particles, Statistics statistics) {
  if (modes < 1) throw InputError("sector_basis: need at least one mode");
  if (particles < 0) throw InputError("sector_basis: negative particle count");
  if (statistics == Statistics::fermion && particles > modes) {
    throw InputError("sector_basis: empty fermion sector, n = " +
                     std::to_string(particles) + " > d = " +
                     std::to_string(modes));
  }
  const int cap =
      statistics == Statistics::fermion ? 1 : particles;
  std::vector<std::vector<int>> states;
  std::vector<int> occ(modes, 0);
  enumerate_descending(modes, particles, std::max(cap, 0), occ, 0, states);
  return SectorBasis(modes, particles, statistics, std::move(states));
}

std::vector<SectorBasis> all_sectors(int modes, int N, Statistics statistics) {
  std::vector<SectorBasis> out;
  out.reserve(N + 1);
  for (int n = 0; n <= N; ++n) out.push_back(sector_basis(modes, n, statistics));
  return out;
}

double create_mode(std::vector<int>& occ, int p, Statistics statistics) {
  if (statistics == Statistics::fermion) {
    if (occ[p] == 1) return 0.0;
    int prefix = 0;
    for (int q = 0; q < p; ++q) prefix += occ[q];
    occ[p] = 1;
    return (prefix % 2 == 0) ? 1.0 : -1.0;
  }
  occ[p] += 1;
  return std::sqrt(static_cast<double>(occ[p]));
}

double annihilate_mode(std::vector<int>& occ, int p, Statistics statistics) {
  if (occ[p] == 0) return 0.0;
  if (statistics == Statistics::fermion) {
    int prefix = 0;
    for (int q = 0; q < p; ++q) prefix += occ[q];
    occ[p] = 0;
    return (prefix % 2 == 0) ? 1.0 : -1.0;
  }
  const double amp = std::sqrt(static_cast<double>(occ[p]));
  occ[p] -= 1;
  return amp;
}

Matrix creation_op(const Vector& f, const SectorBasis& sector) {
  if (f.size() != sector.modes) {
    throw InputError("creation_op: one-particle vector has wrong dimension");
  }
  if (!f.allFinite()) throw InputError("creation_op: non-finite amplitudes");
  const SectorBasis target =
      sector_basis(sector.modes, sector.particles + 1, sector.statistics);
  Matrix out = Matrix::Zero(target.dim(), sector.dim());
  for (int j = 0; j < sector.dim(); ++j) {
    for (int p = 0; p < sector.modes; ++p) {
      if (f(p) == Complex(0.0, 0.0)) continue;
      std::vector<int> occ = sector.states[j];
      const double amp = create_mode(occ, p, sector.statistics);
      if (amp == 0.0) continue;
      out(target.index_of(occ), j) += f(p) * amp;
    }
  }
  return out;
}

Matrix annihilation_op(const Vector& f, const SectorBasis& sector) {
  if (f.size() != sector.modes) {
    throw InputError("annihilation_op: one-particle vector has wrong dimension");
  }
  if (sector.particles == 0) {
    throw InputError("annihilation_op: no sector below the vacuum");
  }
  const SectorBasis target =
      sector_basis(sector.modes, sector.particles - 1, sector.statistics);
  Matrix out = Matrix::Zero(target.dim(), sector.dim());
  for (int j = 0; j < sector.dim(); ++j) {
    for (int p = 0; p < sector.modes; ++p) {
      if (f(p) == Complex(0.0, 0.0)) continue;
      std::vector<int> occ = sector.states[j];
      const double amp = annihilate_mode(occ, p, sector.statistics);
      if (amp == 0.0) continue;
      out(target.index_of(occ), j) += std::conj(f(p)) * amp;
    }
  }
  return out;
}

SparseMatrix embedding_isometry(const SectorBasis& sector) {
  const int d = sector.modes;
  const int n = sector.particles;
  const long tensor_dim = static_cast<long>(std::pow(double(d), double(n)));
  if (tensor_dim > kLiftTensorCap) {
    throw CapacityError("embedding_isometry: d^n = " +
                        std::to_string(tensor_dim) + " exceeds cap " +
                        std::to_string(kLiftTensorCap));
  }
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int col = 0; col < sector.dim(); ++col) {
    const std::vector<int>& occ = sector.states[col];
    std::vector<int> tuple = mode_list(occ);
    double coeff_mag;
    if (sector.statistics == Statistics::boson) {
      double occ_fact = 1.0;
      for (int c : occ) occ_fact *= factorial(c);
      coeff_mag = std::sqrt(occ_fact / factorial(n));
    } else {
      coeff_mag = 1.0 / std::sqrt(factorial(n));
    }
    // distinct arrangements of the multiset, lexicographic from ascending
    std::sort(tuple.begin(), tuple.end());
    do {
      long row = 0;
      for (int k = 0; k < n; ++k) row = row * d + tuple[k];
      double sign = 1.0;
      if (sector.statistics == Statistics::fermion &&
          inversion_parity(tuple) == 1) {
        sign = -1.0;
      }
      trips.emplace_back(static_cast<int>(row), col,
                         Complex(sign * coeff_mag, 0.0));
    } while (std::next_permutation(tuple.begin(), tuple.end()));
  }
  SparseMatrix u(static_cast<int>(tensor_dim), sector.dim());
  u.setFromTriplets(trips.begin(), trips.end());
  return u;
}

Vector compress_product(const SectorBasis& sector,
                        const std::vector<Vector>& factors) {
  const int n = sector.particles;
  if (static_cast<int>(factors.size()) != n) {
    throw InputError("compress_product: need one factor per particle");
  }
  for (const Vector& f : factors) {
    if (f.size() != sector.modes) {
      throw InputError("compress_product: factor dimension mismatch");
    }
  }
  Vector out = Vector::Zero(sector.dim());
  for (int i = 0; i < sector.dim(); ++i) {
    const std::vector<int>& occ = sector.states[i];
    std::vector<int> tuple = mode_list(occ);
    std::sort(tuple.begin(), tuple.end());
    double coeff_mag;
    if (sector.statistics == Statistics::boson) {
      double occ_fact = 1.0;
      for (int c : occ) occ_fact *= factorial(c);
      coeff_mag = std::sqrt(occ_fact / factorial(n));
    } else {
      coeff_mag = 1.0 / std::sqrt(factorial(n));
    }
    Complex acc(0.0, 0.0);
    do {
      Complex prod(1.0, 0.0);
      for (int k = 0; k < n; ++k) prod *= factors[k](tuple[k]);
      double sign = 1.0;
      if (sector.statistics == Statistics::fermion &&
          inversion_parity(tuple) == 1) {
        sign = -1.0;
      }
      acc += sign * prod;
    } while (std::next_permutation(tuple.begin(), tuple.end()));
    out(i) = coeff_mag * acc;
  }
  return out;
}

SparseMatrix one_site_operator(const Matrix& a, int n_factors, int site,
                               int modes) {
  const int d = modes;
  const long dim = pow_int(d, n_factors);
  const long stride = pow_int(d, n_factors - 1 - site);
  std::vector<Eigen::Triplet<Complex>> trips;
  for (long i = 0; i < dim; ++i) {
    const int digit = static_cast<int>((i / stride) % d);
    for (int r = 0; r < d; ++r) {
      const Complex v = a(r, digit);
      if (v == Complex(0.0, 0.0)) continue;
      trips.emplace_back(static_cast<int>(i + (r - digit) * stride),
                         static_cast<int>(i), v);
    }
  }
  SparseMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SparseMatrix two_site_operator(const SparseMatrix& w, int n_factors,
                               int site_j, int site_l, int modes) {
  const int d = modes;
  const long dim = pow_int(d, n_factors);
  const long stride_j = pow_int(d, n_factors - 1 - site_j);
  const long stride_l = pow_int(d, n_factors - 1 - site_l);
  std::vector<Eigen::Triplet<Complex>> trips;
  for (long i = 0; i < dim; ++i) {
    const int a = static_cast<int>((i / stride_j) % d);
    const int b = static_cast<int>((i / stride_l) % d);
    const int wcol = a * d + b;
    for (SparseMatrix::InnerIterator it(w, wcol); it; ++it) {
      const int p = static_cast<int>(it.row()) / d;
      const int q = static_cast<int>(it.row()) % d;
      trips.emplace_back(
          static_cast<int>(i + (p - a) * stride_j + (q - b) * stride_l),
          static_cast<int>(i), it.value());
    }
  }
  SparseMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SparseMatrix full_hamiltonian(const Matrix& h, const TwoBodyOperator& w,
                              int n_particles) {
  const int d = static_cast<int>(h.rows());
  double tensor_dim = std::pow(double(d), double(n_particles));
  if (tensor_dim > kLiftTensorCap) {
    throw CapacityError("full_hamiltonian: d^n = " +
                        std::to_string(static_cast<long>(tensor_dim)) +
                        " exceeds cap " + std::to_string(kLiftTensorCap));
  }
  const int dim = pow_int(d, n_particles);
  SparseMatrix total(dim, dim);
  for (int j = 0; j < n_particles; ++j) {
    total = total + one_site_operator(h, n_particles, j, d);
  }
  if (n_particles >= 2 && w.matrix.nonZeros() > 0) {
    for (int j = 0; j < n_particles; ++j) {
      for (int l = j + 1; l < n_particles; ++l) {
        total = total + two_site_operator(w.matrix, n_particles, j, l, d);
      }
    }
  }
  return total;
}

SparseMatrix interaction_coupling(const TwoBodyOperator& w, int N, int n) {
  if (n < 0 || n > N) throw InputError("interaction_coupling: need 0 <= n <= N");
  const int d = w.modes;
  double tensor_dim = std::pow(double(d), double(N));
  if (tensor_dim > kLiftTensorCap) {
    throw CapacityError("interaction_coupling: d^N exceeds cap");
  }
  const int dim = pow_int(d, N);
  SparseMatrix total(dim, dim);
  for (int j = 0; j < n; ++j) {
    for (int l = n; l < N; ++l) {
      total = total + two_site_operator(w.matrix, N, j, l, d);
    }
  }
  return total;
}

double split_interaction_residual(const SparseMatrix& h_total,
                                  const SparseMatrix& h_first,
                                  const SparseMatrix& h_rest,
                                  const SparseMatrix& coupling) {
  SparseMatrix id_first(h_first.rows(), h_first.cols());
  id_first.setIdentity();
  SparseMatrix id_rest(h_rest.rows(), h_rest.cols());
  id_rest.setIdentity();
  SparseMatrix lhs =
      h_total -
      SparseMatrix(Eigen::kroneckerProduct(h_first, id_rest)) -
      SparseMatrix(Eigen::kroneckerProduct(id_first, h_rest)) - coupling;
  return lhs.norm();
}

TwoBodyOperator zero_interaction(int modes) {
  return TwoBodyOperator{modes, SparseMatrix(modes * modes, modes * modes),
                         true};
}

ManyBodyOperator lift_first_quantized(const Matrix& h,
                                      const TwoBodyOperator& w,
                                      int n_particles, Statistics statistics) {
  const int d = static_cast<int>(h.rows());
  require_hermitian(h, "lift_first_quantized");
  SectorBasis basis = sector_basis(d, n_particles, statistics);
  if (n_particles == 0) {
    return ManyBodyOperator{std::move(basis), Matrix::Zero(1, 1)};
  }
  if (n_particles == 1) {
    return ManyBodyOperator{std::move(basis), h};
  }
  if (w.modes != d) {
    throw InputError("lift_first_quantized: interaction dimension mismatch");
  }
  const SparseMatrix u = embedding_isometry(basis);
  const SparseMatrix hfull = full_hamiltonian(h, w, n_particles);
  Matrix compressed = Matrix(u.adjoint() * SparseMatrix(hfull * u));
  if (!is_hermitian(compressed, 1e-12)) {
    throw NumericError("lift_first_quantized: compression lost Hermiticity");
  }
  return ManyBodyOperator{std::move(basis), std::move(compressed)};
}

namespace {

Matrix second_quantize_sector(const Matrix& h, const TwoBodyOperator& w,
                              const SectorBasis& basis) {
  const int d = basis.modes;
  const int dim = basis.dim();
  Matrix out = Matrix::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    const std::vector<int>& occ = basis.states[col];
    // one-body: sum_pq h_pq a*_p a_q
    for (int q = 0; q < d; ++q) {
      if (occ[q] == 0) continue;
      std::vector<int> occ1 = occ;
      const double a1 = annihilate_mode(occ1, q, basis.statistics);
      for (int p = 0; p < d; ++p) {
        if (h(p, q) == Complex(0.0, 0.0)) continue;
        std::vector<int> occ2 = occ1;
        const double a2 = create_mode(occ2, p, basis.statistics);
        if (a2 == 0.0) continue;
        out(basis.index_of(occ2), col) += h(p, q) * a1 * a2;
      }
    }
    // two-body: 1/2 sum_pqrs w_(pq),(rs) a*_p a*_q a_s a_r
    if (basis.particles >= 2 && w.matrix.nonZeros() > 0) {
      for (int r = 0; r < d; ++r) {
        if (occ[r] == 0) continue;
        std::vector<int> o1 = occ;
        const double a1 = annihilate_mode(o1, r, basis.statistics);
        for (int s = 0; s < d; ++s) {
          if (o1[s] == 0) continue;
          std::vector<int> o2 = o1;
          const double a2 = annihilate_mode(o2, s, basis.statistics);
          const int wcol = r * d + s;
          for (SparseMatrix::InnerIterator it(w.matrix, wcol); it; ++it) {
            const int p = static_cast<int>(it.row()) / d;
            const int q = static_cast<int>(it.row()) % d;
            std::vector<int> o3 = o2;
            const double a3 = create_mode(o3, q, basis.statistics);
            if (a3 == 0.0) continue;
            std::vector<int> o4 = o3;
            const double a4 = create_mode(o4, p, basis.statistics);
            if (a4 == 0.0) continue;
            out(basis.index_of(o4), col) +=
                0.5 * it.value() * a1 * a2 * a3 * a4;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

FockOperator second_quantize(const Matrix& h, const TwoBodyOperator& w, int N,
                             Statistics statistics, int sector_cap) {
  const int d = static_cast<int>(h.rows());
  require_hermitian(h, "second_quantize");
  if (w.modes != d) {
    throw InputError("second_quantize: interaction dimension mismatch");
  }
  if (w.matrix.nonZeros() > 0 && !w.exchange_symmetric) {
    throw InputError("second_quantize: interaction must be exchange symmetric");
  }
  if (N < 0) throw InputError("second_quantize: negative N");
  FockOperator out;
  out.N = N;
  out.blocks.reserve(N + 1);
  for (int n = 0; n <= N; ++n) {
    SectorBasis basis = sector_basis(d, n, statistics);
    if (basis.dim() > sector_cap) {
      throw CapacityError("second_quantize: sector n = " + std::to_string(n) +
                          " has dimension " + std::to_string(basis.dim()) +
                          " > budget " + std::to_string(sector_cap));
    }
    Matrix block;
    if (n == 0) {
      block = Matrix::Zero(1, 1);
    } else if (n == 1) {
      block = h;
    } else {
      block = second_quantize_sector(h, w, basis);
      if (!is_hermitian(block, 1e-12)) {
        throw NumericError("second_quantize: sector block lost Hermiticity");
      }
    }
    out.blocks.push_back(ManyBodyOperator{std::move(basis), std::move(block)});
  }
  return out;
}

}  // namespace fockrage
