#pragma once

#include <complex>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace fockrage {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

/// Bad arguments or malformed physical input.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested object exceeds the dense-matrix budget.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver breakdown or a result outside numerical tolerance.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integrator step too large for the requested tolerance.
struct AccuracyError : NumericError {
  AccuracyError(const std::string& what, double suggested)
      : NumericError(what), suggested_step(suggested) {}
  double suggested_step;
};

/// ||a - a^dagger|| <= rel_tol * max(1, ||a||), Frobenius.
bool is_hermitian(const Matrix& a, double rel_tol = 1e-12);
void require_hermitian(const Matrix& a, const std::string& what,
                       double rel_tol = 1e-12);

/// Sum of singular values. Uses the spectral route for Hermitian input.
double trace_norm(const Matrix& a);

/// Sum of |eigenvalues|; caller guarantees Hermiticity.
double trace_norm_hermitian(const Matrix& a);

/// Largest singular value.
double operator_norm(const Matrix& a);

/// Spectral square root of a PSD Hermitian matrix. Eigenvalues below
/// -tol * scale raise InputError; small negatives are clipped to zero.
Matrix hermitian_sqrt(const Matrix& a, double tol = 1e-10);

/// Spectral a^{-1/2}; requires min eigenvalue > 0.
Matrix hermitian_inv_sqrt(const Matrix& a);

/// GUE-like random Hermitian matrix, entries ~ N(0,1)/sqrt(2).
Matrix random_hermitian(int dim, std::mt19937_64& rng);

/// Random density matrix: normalized G G^dagger with Gaussian G.
Matrix random_density(int dim, std::mt19937_64& rng);

/// Random unit vector with Gaussian components.
Vector random_unit_vector(int dim, std::mt19937_64& rng);

}  // namespace fockrage
