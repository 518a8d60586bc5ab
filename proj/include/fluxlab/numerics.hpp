#pragma once

#include <complex>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace fluxlab {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigenSystem {
  RealVector values;    // ascending
  DenseMatrix vectors;  // columns
};

/// Full eigendecomposition of a hermitian matrix (LAPACK zheevd).
EigenSystem hermitian_eig(const DenseMatrix& a);

/// Lowest `k` eigenpairs of a hermitian sparse matrix by Lanczos with full
/// reorthogonalization. Falls back to dense for small dimensions.
EigenSystem lowest_eigenpairs(const SparseMatrix& a, int k,
                              int max_iterations = 400, double tol = 1e-12,
                              unsigned seed = 7);

/// e^{scale * a} for hermitian a, via eigendecomposition.
DenseMatrix hermitian_exp(const DenseMatrix& a, Complex scale);

/// Operator 2-norm by power iteration on A^dag A. Deterministic start vector.
double spectral_norm(const std::function<DenseVector(const DenseVector&)>& apply,
                     const std::function<DenseVector(const DenseVector&)>& apply_adjoint,
                     Eigen::Index dim, double rel_tol = 1e-6,
                     int max_iterations = 300, unsigned seed = 11);

double spectral_norm(const DenseMatrix& a, double rel_tol = 1e-6);
double spectral_norm(const SparseMatrix& a, double rel_tol = 1e-6);

/// Unwraps a phase sequence (radians) to a continuous curve starting at the
/// first element.
std::vector<double> unwrap_phases(const std::vector<double>& phases);

/// Distance to the nearest integer.
double int_distance(double x);

}  // namespace fluxlab
