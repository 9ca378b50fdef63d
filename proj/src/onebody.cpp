#include "fockrage/onebody.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fockrage {

OneBodyOperator build_lattice_one_body(const LatticeSpec& spec) {
  if (spec.length < 2) {
    throw InputError("build_lattice_one_body: need at least 2 sites");
  }
  if (static_cast<int>(spec.potential.size()) != spec.length) {
    throw InputError("build_lattice_one_body: potential size != length");
  }
  if (!std::isfinite(spec.hopping)) {
    throw InputError("build_lattice_one_body: non-finite hopping");
  }
  for (double v : spec.potential) {
    if (!std::isfinite(v)) {
      throw InputError("build_lattice_one_body: non-finite potential entry");
    }
  }
  const int L = spec.length;
  Matrix m = Matrix::Zero(L, L);
  for (int x = 0; x < L; ++x) {
    m(x, x) = 2.0 * std::abs(spec.hopping) + spec.potential[x];
    if (x + 1 < L) {
      m(x, x + 1) = -spec.hopping;
      m(x + 1, x) = -spec.hopping;
    }
  }
  return OneBodyOperator{L, std::move(m), 0.0};
}

OneBodyOperator shift_spectrum(const OneBodyOperator& h, double margin) {
  if (!(margin > 0.0)) {
    throw InputError("shift_spectrum: margin must be positive");
  }
  require_hermitian(h.matrix, "shift_spectrum");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("shift_spectrum: eigensolver failed");
  }
  const double e = (1.0 + margin) - es.eigenvalues().minCoeff();
  OneBodyOperator out;
  out.dim = h.dim;
  out.matrix = h.matrix + e * Matrix::Identity(h.dim, h.dim);
  out.shift = h.shift + e;
  return out;
}

TwoBodyOperator build_pair_interaction(const LatticeSpec& spec,
                                       const InteractionProfile& profile) {
  if (spec.length < 2) {
    throw InputError("build_pair_interaction: need at least 2 sites");
  }
  if (!std::isfinite(profile.strength)) {
    throw InputError("build_pair_interaction: non-finite strength");
  }
  if (profile.kind == InteractionProfile::Kind::exponential &&
      !(profile.range > 0.0 && std::isfinite(profile.range))) {
    throw InputError("build_pair_interaction: exponential range must be > 0");
  }
  const int d = spec.length;
  SparseMatrix w(d * d, d * d);
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<size_t>(d) * d);
  for (int x1 = 0; x1 < d; ++x1) {
    for (int x2 = 0; x2 < d; ++x2) {
      const int idx = x1 * d + x2;
      double val = 0.0;
      switch (profile.kind) {
        case InteractionProfile::Kind::contact:
          val = (x1 == x2) ? profile.strength : 0.0;
          break;
        case InteractionProfile::Kind::exponential:
          val = profile.strength *
                std::exp(-std::abs(double(x1 - x2)) / profile.range);
          break;
      }
      if (val != 0.0) trips.emplace_back(idx, idx, Complex(val, 0.0));
    }
  }
  w.setFromTriplets(trips.begin(), trips.end());
  return TwoBodyOperator{d, std::move(w), true};
}

TwoBodyOperator two_body_from_dense(int modes, const Matrix& pair_matrix) {
  if (pair_matrix.rows() != modes * modes ||
      pair_matrix.cols() != modes * modes) {
    throw InputError("two_body_from_dense: matrix must be d^2 x d^2");
  }
  require_hermitian(pair_matrix, "two_body_from_dense");
  SparseMatrix w = pair_matrix.sparseView();
  SparseMatrix p = pair_swap(modes);
  const double sym_defect =
      Matrix(SparseMatrix(p * w * p) - w).norm();
  const bool symmetric = sym_defect <= 1e-12 * std::max(1.0, pair_matrix.norm());
  return TwoBodyOperator{modes, std::move(w), symmetric};
}

Matrix window_projector(int length, int center, int radius) {
  if (center < 0 || center >= length) {
    throw InputError("window_projector: center outside lattice");
  }
  Matrix k = Matrix::Zero(length, length);
  for (int x = 0; x < length; ++x) {
    if (std::abs(x - center) <= radius) k(x, x) = 1.0;
  }
  return k;
}

SparseMatrix pair_swap(int modes) {
  SparseMatrix p(modes * modes, modes * modes);
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<size_t>(modes) * modes);
  for (int x1 = 0; x1 < modes; ++x1) {
    for (int x2 = 0; x2 < modes; ++x2) {
      trips.emplace_back(x2 * modes + x1, x1 * modes + x2, Complex(1.0, 0.0));
    }
  }
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

std::vector<WindowSingularValues> hyp_w2_diagnostic(
    const OneBodyOperator& h, const TwoBodyOperator& w,
    const std::vector<Matrix>& windows, const std::vector<int>& tail_ranks) {
  const int d = h.dim;
  if (w.modes != d) {
    throw InputError("hyp_w2_diagnostic: operator dimensions disagree");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("hyp_w2_diagnostic: eigensolver failed");
  }
  if (es.eigenvalues().minCoeff() <= 1.0) {
    throw InputError("hyp_w2_diagnostic: h must be shifted above 1");
  }

  Matrix h12 = Matrix::Zero(d * d, d * d);
  // h1 + h2 on the pair basis
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int c = 0; c < d; ++c) {
        h12(a * d + c, b * d + c) += h.matrix(a, b);
        h12(c * d + a, c * d + b) += h.matrix(a, b);
      }
    }
  }
  const Matrix h12_inv_sqrt = hermitian_inv_sqrt(h12);
  const Matrix dressed = h12_inv_sqrt * Matrix(w.matrix) * h12_inv_sqrt;

  std::vector<WindowSingularValues> out;
  out.reserve(windows.size());
  int widx = 0;
  for (const Matrix& k : windows) {
    if (k.rows() != d || k.cols() != d) {
      throw InputError("hyp_w2_diagnostic: window dimension mismatch");
    }
    Matrix k12 = Matrix::Zero(d * d, d * d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        for (int c = 0; c < d; ++c) {
          k12(a * d + c, b * d + c) += k(a, b);
          k12(c * d + a, c * d + b) += k(a, b);
        }
      }
    }
    Eigen::BDCSVD<Matrix> svd(k12 * dressed);
    WindowSingularValues entry;
    entry.label = "window_" + std::to_string(widx++);
    entry.singular_values = svd.singularValues();
    for (int r : tail_ranks) {
      double tail = 0.0;
      for (Eigen::Index i = r; i < entry.singular_values.size(); ++i) {
        tail += entry.singular_values(i);
      }
      entry.tail_mass.emplace_back(r, tail);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace fockrage
