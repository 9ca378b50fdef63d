#include "fockrage/reduced.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace fockrage {

namespace {

// Weight table of the occupation-basis reduction: for a target state mu and
// complement state kappa, weight(mu,kappa) = alpha_mu(mu+kappa)/sqrt(prod mu!)
// where alpha is the amplitude of annihilating the modes of mu (ascending,
// rightmost first) from |mu+kappa>. source_index is the position of mu+kappa
// in the source sector, -1 when invalid.
struct ReductionTable {
  Eigen::MatrixXd weight;               // target_dim x complement_dim
  Eigen::MatrixXi source_index;         // target_dim x complement_dim
};

ReductionTable build_reduction_table(const SectorBasis& source,
                                     const SectorBasis& target,
                                     const SectorBasis& complement) {
  ReductionTable table;
  table.weight = Eigen::MatrixXd::Zero(target.dim(), complement.dim());
  table.source_index =
      Eigen::MatrixXi::Constant(target.dim(), complement.dim(), -1);
  const int d = source.modes;
  for (int t = 0; t < target.dim(); ++t) {
    const std::vector<int>& mu = target.states[t];
    std::vector<int> mu_modes;
    for (int p = 0; p < d; ++p) {
      for (int c = 0; c < mu[p]; ++c) mu_modes.push_back(p);
    }
    double mu_fact = 1.0;
    for (int p = 0; p < d; ++p) {
      for (int c = 2; c <= mu[p]; ++c) mu_fact *= c;
    }
    const double norm = std::sqrt(mu_fact);
    for (int c = 0; c < complement.dim(); ++c) {
      const std::vector<int>& kappa = complement.states[c];
      std::vector<int> occ(d);
      bool valid = true;
      for (int p = 0; p < d; ++p) {
        occ[p] = mu[p] + kappa[p];
        if (source.statistics == Statistics::fermion && occ[p] > 1) {
          valid = false;
          break;
        }
      }
      if (!valid) continue;
      const int src = source.index_of(occ);
      if (src < 0) continue;
      double amp = 1.0;
      for (auto it = mu_modes.rbegin(); it != mu_modes.rend(); ++it) {
        amp *= annihilate_mode(occ, *it, source.statistics);
        if (amp == 0.0) break;
      }
      if (amp == 0.0) continue;
      table.weight(t, c) = amp / norm;
      table.source_index(t, c) = src;
    }
  }
  return table;
}

Matrix partial_trace_last(const Matrix& full, int keep_dim, int trace_dim) {
  Matrix out = Matrix::Zero(keep_dim, keep_dim);
  for (int a = 0; a < keep_dim; ++a) {
    for (int b = 0; b < keep_dim; ++b) {
      Complex acc(0.0, 0.0);
      for (int k = 0; k < trace_dim; ++k) {
        acc += full(a * trace_dim + k, b * trace_dim + k);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double FockDensity::total_trace() const {
  double t = 0.0;
  for (const DensityMatrix& b : blocks) t += b.trace();
  return t;
}

void FockDensity::validate(bool normalized) const {
  if (static_cast<int>(blocks.size()) != N + 1) {
    throw InputError("FockDensity: expected N+1 blocks");
  }
  const double scale = std::max(1.0, std::abs(total_trace()));
  for (int n = 0; n <= N; ++n) {
    const DensityMatrix& b = blocks[n];
    if (b.sector.particles != n) {
      throw InputError("FockDensity: block lives on the wrong sector");
    }
    require_hermitian(b.matrix, "FockDensity block " + std::to_string(n));
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw InputError("FockDensity: block " + std::to_string(n) +
                       " is not positive semidefinite");
    }
  }
  if (normalized && std::abs(total_trace() - 1.0) > 1e-10) {
    throw InputError("FockDensity: total trace differs from 1");
  }
}

FockDensity zero_fock_density(int modes, int N, Statistics statistics) {
  FockDensity out;
  out.N = N;
  out.blocks.reserve(N + 1);
  for (int n = 0; n <= N; ++n) {
    SectorBasis basis = sector_basis(modes, n, statistics);
    Matrix zero = Matrix::Zero(basis.dim(), basis.dim());
    out.blocks.push_back(DensityMatrix{std::move(basis), std::move(zero)});
  }
  return out;
}

FockDensity vacuum_state(int modes, int N, Statistics statistics) {
  FockDensity out = zero_fock_density(modes, N, statistics);
  out.blocks[0].matrix(0, 0) = 1.0;
  return out;
}

FockDensity single_sector_state(const DensityMatrix& top, int N) {
  if (top.sector.particles != N) {
    throw InputError("single_sector_state: block sector != N");
  }
  FockDensity out =
      zero_fock_density(top.sector.modes, N, top.sector.statistics);
  out.blocks[N] = top;
  return out;
}

DensityMatrix reduce(const DensityMatrix& gamma, int n) {
  const SectorBasis& source = gamma.sector;
  const int N = source.particles;
  if (n < 0 || n > N) {
    throw InputError("reduce: need 0 <= n <= N");
  }
  if (n == N) return gamma;
  SectorBasis target = sector_basis(source.modes, n, source.statistics);
  const SectorBasis complement =
      sector_basis(source.modes, N - n, source.statistics);
  const ReductionTable table =
      build_reduction_table(source, target, complement);
  Matrix out = Matrix::Zero(target.dim(), target.dim());
  for (int row = 0; row < target.dim(); ++row) {
    for (int col = 0; col < target.dim(); ++col) {
      Complex acc(0.0, 0.0);
      for (int c = 0; c < complement.dim(); ++c) {
        const int sr = table.source_index(row, c);
        const int sc = table.source_index(col, c);
        if (sr < 0 || sc < 0) continue;
        acc += table.weight(row, c) * table.weight(col, c) *
               gamma.matrix(sr, sc);
      }
      out(row, col) = acc;
    }
  }
  return DensityMatrix{std::move(target), std::move(out)};
}

DensityMatrix reduce_via_embedding(const DensityMatrix& gamma, int n) {
  const SectorBasis& source = gamma.sector;
  const int N = source.particles;
  if (n < 0 || n > N) {
    throw InputError("reduce_via_embedding: need 0 <= n <= N");
  }
  if (n == N) return gamma;
  const int d = source.modes;
  SectorBasis target = sector_basis(d, n, source.statistics);
  const SparseMatrix u_source = embedding_isometry(source);
  const SparseMatrix u_target = embedding_isometry(target);
  const Matrix embedded =
      Matrix(u_source) * gamma.matrix * Matrix(u_source).adjoint();
  int keep_dim = 1, trace_dim = 1;
  for (int i = 0; i < n; ++i) keep_dim *= d;
  for (int i = 0; i < N - n; ++i) trace_dim *= d;
  const Matrix traced = partial_trace_last(embedded, keep_dim, trace_dim);
  Matrix out = binomial(N, n) *
               Matrix(Matrix(u_target).adjoint() * traced * Matrix(u_target));
  return DensityMatrix{std::move(target), std::move(out)};
}

DensityMatrix fock_reduce(const FockDensity& state, int n) {
  if (n < 0 || n > state.N) {
    throw InputError("fock_reduce: need 0 <= n <= N");
  }
  DensityMatrix acc;
  bool first = true;
  for (int m = n; m <= state.N; ++m) {
    const DensityMatrix& block = state.blocks[m];
    DensityMatrix term = reduce(block, n);
    if (first) {
      acc = std::move(term);
      first = false;
    } else {
      acc.matrix += term.matrix;
    }
  }
  return acc;
}

ReducedSet reduce_all(const FockDensity& state) {
  ReducedSet out;
  out.N = state.N;
  out.gammas.reserve(state.N + 1);
  for (int n = 0; n <= state.N; ++n) out.gammas.push_back(fock_reduce(state, n));
  return out;
}

FockDensity reconstruct_blocks(const ReducedSet& reduced) {
  const int N = reduced.N;
  if (static_cast<int>(reduced.gammas.size()) != N + 1) {
    throw InputError("reconstruct_blocks: expected N+1 reduced matrices");
  }
  FockDensity out;
  out.N = N;
  out.blocks.reserve(N + 1);
  for (int n = 0; n <= N; ++n) {
    Matrix block = reduced.gammas[n].matrix;
    for (int j = 1; j <= N - n; ++j) {
      // reduce already carries C(n+j,n); the alternating sum wants the
      // plain partial trace times C(n+j,n), which is the same thing.
      block += std::pow(-1.0, j) * reduce(reduced.gammas[n + j], n).matrix;
    }
    if (std::abs(block.trace().real()) < 1e-9 && block.norm() < 1e-9) {
      block.setZero();
    }
    out.blocks.push_back(DensityMatrix{reduced.gammas[n].sector, std::move(block)});
  }
  return out;
}

Complex correlations(const FockDensity& state,
                     const std::vector<Vector>& creation_list,
                     const std::vector<Vector>& annihilation_list) {
  if (creation_list.size() != annihilation_list.size()) {
    throw InputError("correlations: creation/annihilation lists differ in length");
  }
  const int n = static_cast<int>(creation_list.size());
  Complex total(0.0, 0.0);
  for (int m = n; m <= state.N; ++m) {
    const DensityMatrix& block = state.blocks[m];
    if (block.matrix.norm() == 0.0) continue;
    // rightmost operator acts first: a(g_n) ... then a*(f_n) ... a*(f_1)
    Matrix op = Matrix::Identity(block.sector.dim(), block.sector.dim());
    int level = m;
    for (int k = n - 1; k >= 0; --k) {
      op = annihilation_op(annihilation_list[k], state.blocks[level].sector) *
           op;
      --level;
    }
    for (int k = n - 1; k >= 0; --k) {
      op = creation_op(creation_list[k], state.blocks[level].sector) * op;
      ++level;
    }
    total += (op * block.matrix).trace();
  }
  return total;
}

ObservableDictionary window_dictionary(int modes, int max_sector,
                                       Statistics statistics, int center,
                                       int radius) {
  ObservableDictionary dict;
  dict.modes = modes;
  dict.max_sector = max_sector;
  dict.statistics = statistics;
  dict.window_center = center;
  dict.window_radius = radius;
  for (int n = 0; n <= max_sector; ++n) {
    const SectorBasis basis = sector_basis(modes, n, statistics);
    std::vector<int> windowed;
    for (int i = 0; i < basis.dim(); ++i) {
      const std::vector<int>& occ = basis.states[i];
      bool inside = true;
      for (int p = 0; p < modes && inside; ++p) {
        if (occ[p] > 0 && std::abs(p - center) > radius) inside = false;
      }
      if (inside) windowed.push_back(i);
    }
    const std::string prefix = "n" + std::to_string(n) + "_";
    for (size_t a = 0; a < windowed.size(); ++a) {
      dict.entries.push_back(DictionaryEntry{
          n, windowed[a], windowed[a], DictionaryEntry::Kind::diagonal,
          prefix + "d" + std::to_string(windowed[a])});
      for (size_t b = a + 1; b < windowed.size(); ++b) {
        const std::string pq =
            std::to_string(windowed[a]) + "_" + std::to_string(windowed[b]);
        dict.entries.push_back(DictionaryEntry{
            n, windowed[a], windowed[b], DictionaryEntry::Kind::real_part,
            prefix + "re" + pq});
        dict.entries.push_back(DictionaryEntry{
            n, windowed[a], windowed[b], DictionaryEntry::Kind::imag_part,
            prefix + "im" + pq});
      }
    }
  }
  return dict;
}

double dictionary_pairing(const DictionaryEntry& entry, const Matrix& gamma_n) {
  const Complex z = gamma_n(entry.p, entry.q);
  switch (entry.kind) {
    case DictionaryEntry::Kind::diagonal:
      return z.real();
    case DictionaryEntry::Kind::real_part:
      return (gamma_n(entry.q, entry.p) + z).real();
    case DictionaryEntry::Kind::imag_part:
      return (kI * (gamma_n(entry.q, entry.p) - z)).real();
  }
  return 0.0;
}

Matrix dictionary_matrix(const DictionaryEntry& entry, int sector_dim) {
  Matrix k = Matrix::Zero(sector_dim, sector_dim);
  switch (entry.kind) {
    case DictionaryEntry::Kind::diagonal:
      k(entry.p, entry.p) = 1.0;
      break;
    case DictionaryEntry::Kind::real_part:
      k(entry.p, entry.q) = 1.0;
      k(entry.q, entry.p) = 1.0;
      break;
    case DictionaryEntry::Kind::imag_part:
      k(entry.p, entry.q) = kI;
      k(entry.q, entry.p) = -kI;
      break;
  }
  return k;
}

std::vector<double> dictionary_pairings(const ObservableDictionary& dict,
                                        const ReducedSet& reduced) {
  std::vector<double> out;
  out.reserve(dict.entries.size());
  for (const DictionaryEntry& e : dict.entries) {
    if (e.sector > reduced.N) {
      throw InputError("dictionary_pairings: entry sector above N");
    }
    out.push_back(dictionary_pairing(e, reduced.gammas[e.sector].matrix));
  }
  return out;
}

double weak_star_gap(const ReducedSet& a, const ReducedSet& b,
                     const ObservableDictionary& dict) {
  double gap = 0.0;
  for (const DictionaryEntry& e : dict.entries) {
    if (e.sector > a.N || e.sector > b.N) {
      throw InputError("weak_star_gap: dictionary sector above N");
    }
    const double d = dictionary_pairing(e, a.gammas[e.sector].matrix) -
                     dictionary_pairing(e, b.gammas[e.sector].matrix);
    gap = std::max(gap, std::abs(d));
  }
  return gap;
}

double weak_star_gap(const FockDensity& a, const FockDensity& b,
                     const ObservableDictionary& dict) {
  return weak_star_gap(reduce_all(a), reduce_all(b), dict);
}

double energy_seminorm(const FockDensity& state, const FockOperator& free_op) {
  if (free_op.N < state.N) {
    throw InputError("energy_seminorm: free Hamiltonian has too few blocks");
  }
  double total = 0.0;
  for (int n = 0; n <= state.N; ++n) {
    const Matrix& h0 = free_op.blocks[n].matrix;
    Matrix root;
    try {
      root = hermitian_sqrt(h0);
    } catch (const InputError&) {
      throw InputError("energy_seminorm: free block " + std::to_string(n) +
                       " is not positive semidefinite");
    }
    total += (root * state.blocks[n].matrix * root).trace().real();
  }
  return total;
}

Matrix sector_window_projector(const SectorBasis& basis, int center,
                               int radius) {
  Matrix proj = Matrix::Zero(basis.dim(), basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    const std::vector<int>& occ = basis.states[i];
    bool inside = true;
    for (int p = 0; p < basis.modes && inside; ++p) {
      if (occ[p] > 0 && std::abs(p - center) > radius) inside = false;
    }
    if (inside) proj(i, i) = 1.0;
  }
  return proj;
}

}  // namespace fockrage
