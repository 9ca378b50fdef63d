#include "fockrage/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fockrage {

bool is_hermitian(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.norm());
  return (a - a.adjoint()).norm() <= rel_tol * scale;
}

void require_hermitian(const Matrix& a, const std::string& what,
                       double rel_tol) {
  if (!is_hermitian(a, rel_tol)) {
    throw InputError(what + ": matrix is not Hermitian within tolerance");
  }
}

double trace_norm(const Matrix& a) {
  if (a.rows() == a.cols() && is_hermitian(a, 1e-10)) {
    return trace_norm_hermitian(a);
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double trace_norm_hermitian(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("trace_norm_hermitian: eigensolver failed");
  }
  return es.eigenvalues().cwiseAbs().sum();
}

double operator_norm(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

Matrix hermitian_sqrt(const Matrix& a, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw NumericError("hermitian_sqrt: eigensolver failed");
  }
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  RealVector roots = es.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (roots(i) < -tol * scale) {
      throw InputError("hermitian_sqrt: matrix is not positive semidefinite");
    }
    roots(i) = std::sqrt(std::max(roots(i), 0.0));
  }
  return es.eigenvectors() * roots.asDiagonal() *
         es.eigenvectors().adjoint();
}

Matrix hermitian_inv_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw NumericError("hermitian_inv_sqrt: eigensolver failed");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw InputError("hermitian_inv_sqrt: matrix is not positive definite");
  }
  RealVector roots = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * roots.asDiagonal() *
         es.eigenvectors().adjoint();
}

Matrix random_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix a(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      a(i, j) = Complex(dist(rng), dist(rng));
    }
  }
  return (a + a.adjoint()) / 2.0;
}

Matrix random_density(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      g(i, j) = Complex(dist(rng), dist(rng));
    }
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

Vector random_unit_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(dist(rng), dist(rng));
  v.normalize();
  return v;
}

}  // namespace fockrage
