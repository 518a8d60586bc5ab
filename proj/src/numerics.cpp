#include "fluxlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Eigenvalues>

namespace fluxlab {

EigenSystem hermitian_eig(const DenseMatrix& a) {
  const auto n = a.rows();
  if (n != a.cols()) throw SolverError("hermitian_eig: matrix not square");
  EigenSystem sys;
  sys.values.resize(n);
  sys.vectors = a;  // zheevd overwrites with eigenvectors
  lapack_int info = LAPACKE_zheevd(
      LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
      sys.vectors.data(), static_cast<lapack_int>(n), sys.values.data());
  if (info != 0) {
    // rare convergence failure: fall back to the QR-based solver
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
    if (es.info() != Eigen::Success) {
      throw SolverError("hermitian_eig: eigensolver failed, info=" +
                        std::to_string(info));
    }
    sys.values = es.eigenvalues();
    sys.vectors = es.eigenvectors();
  }
  return sys;
}

DenseMatrix hermitian_exp(const DenseMatrix& a, Complex scale) {
  EigenSystem sys = hermitian_eig(a);
  DenseVector phases(sys.values.size());
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    phases(i) = std::exp(scale * sys.values(i));
  }
  return sys.vectors * phases.asDiagonal() * sys.vectors.adjoint();
}

EigenSystem lowest_eigenpairs(const SparseMatrix& a, int k, int max_iterations,
                              double tol, unsigned seed) {
  const Eigen::Index n = a.rows();
  if (n <= 512) {
    EigenSystem full = hermitian_eig(DenseMatrix(a));
    EigenSystem out;
    int kk = std::min<Eigen::Index>(k, n);
    out.values = full.values.head(kk);
    out.vectors = full.vectors.leftCols(kk);
    return out;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v.normalize();

  std::vector<DenseVector> basis;
  std::vector<double> alpha, beta;
  basis.push_back(v);

  EigenSystem tri;
  int converged_at = 0;
  for (int it = 0; it < max_iterations; ++it) {
    DenseVector w = a * basis.back();
    double al = std::real(basis.back().dot(w));
    alpha.push_back(al);
    w -= al * basis.back();
    if (basis.size() > 1) w -= beta.back() * basis[basis.size() - 2];
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) w -= b.dot(w) * b;
    }
    double nb = w.norm();
    const int m = static_cast<int>(alpha.size());
    if (m >= std::min(2 * k + 8, 16) && (it % 4 == 0 || nb < 1e-14)) {
      // check Ritz convergence of the lowest k values
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      bool ok = true;
      for (int j = 0; j < std::min(k, m); ++j) {
        double resid = std::abs(es.eigenvectors()(m - 1, j)) * nb;
        if (resid > tol * std::max(1.0, std::abs(es.eigenvalues()(j)))) {
          ok = false;
          break;
        }
      }
      if (ok || nb < 1e-14) {
        converged_at = m;
        break;
      }
    }
    if (nb < 1e-14) {
      converged_at = m;
      break;
    }
    beta.push_back(nb);
    basis.push_back(w / nb);
  }
  const int m = converged_at > 0 ? converged_at : static_cast<int>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
  for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

  EigenSystem out;
  const int kk = std::min(k, m);
  out.values.resize(kk);
  out.vectors.resize(n, kk);
  for (int j = 0; j < kk; ++j) {
    out.values(j) = es.eigenvalues()(j);
    DenseVector vec = DenseVector::Zero(n);
    for (int i = 0; i < m; ++i) vec += es.eigenvectors()(i, j) * basis[i];
    out.vectors.col(j) = vec.normalized();
  }
  return out;
}

double spectral_norm(const std::function<DenseVector(const DenseVector&)>& apply,
                     const std::function<DenseVector(const DenseVector&)>& apply_adjoint,
                     Eigen::Index dim, double rel_tol, int max_iterations,
                     unsigned seed) {
  if (dim == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    DenseVector w = apply(v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    DenseVector u = apply_adjoint(w);
    double nu = u.norm();
    if (nu == 0.0) return nw;
    double next = std::sqrt(nu);
    v = u / nu;
    if (it > 2 && std::abs(next - sigma) <= rel_tol * std::max(next, 1e-300)) {
      return next;
    }
    sigma = next;
  }
  return sigma;
}

double spectral_norm(const DenseMatrix& a, double rel_tol) {
  return spectral_norm(
      [&](const DenseVector& v) { return DenseVector(a * v); },
      [&](const DenseVector& v) { return DenseVector(a.adjoint() * v); },
      a.rows(), rel_tol);
}

double spectral_norm(const SparseMatrix& a, double rel_tol) {
  SparseMatrix adj = SparseMatrix(a.adjoint());
  return spectral_norm(
      [&](const DenseVector& v) { return DenseVector(a * v); },
      [&](const DenseVector& v) { return DenseVector(adj * v); },
      a.rows(), rel_tol);
}

std::vector<double> unwrap_phases(const std::vector<double>& phases) {
  std::vector<double> out = phases;
  const double two_pi = 2.0 * M_PI;
  for (size_t i = 1; i < out.size(); ++i) {
    double delta = out[i] - out[i - 1];
    while (delta > M_PI) {
      out[i] -= two_pi;
      delta = out[i] - out[i - 1];
    }
    while (delta < -M_PI) {
      out[i] += two_pi;
      delta = out[i] - out[i - 1];
    }
  }
  return out;
}

double int_distance(double x) { return std::abs(x - std::round(x)); }

}  // namespace fluxlab
