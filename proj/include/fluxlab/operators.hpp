#pragma once

#include <memory>
#include <variant>

#include "fluxlab/hilbert.hpp"

namespace fluxlab {

struct OperatorFlags {
  bool hermitian = false;
  bool unitary = false;
  bool even = true;  // fermion parity; spin operators are trivially even
};

/// Operator on a many-body space with a declared support region. Set flags
/// are verified at construction (operator 2-norm, tolerance 1e-12).
class ManyBodyOperator {
 public:
  ManyBodyOperator(std::shared_ptr<const ManyBodySpace> space, DenseMatrix m,
                   Region support, OperatorFlags flags = {},
                   double tol = 1e-12);
  ManyBodyOperator(std::shared_ptr<const ManyBodySpace> space, SparseMatrix m,
                   Region support, OperatorFlags flags = {},
                   double tol = 1e-12);

  const ManyBodySpace& space() const { return *space_; }
  std::shared_ptr<const ManyBodySpace> space_ptr() const { return space_; }
  const Region& support() const { return support_; }
  const OperatorFlags& flags() const { return flags_; }

  bool is_dense() const { return std::holds_alternative<DenseMatrix>(m_); }
  const DenseMatrix& dense() const { return std::get<DenseMatrix>(m_); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(m_); }
  DenseMatrix to_dense() const;

  DenseVector apply(const DenseVector& v) const;

 private:
  void verify_flags(double tol) const;
  std::shared_ptr<const ManyBodySpace> space_;
  std::variant<SparseMatrix, DenseMatrix> m_;
  Region support_;
  OperatorFlags flags_;
};

/// Max operator-norm commutator of `a` with single-site generators outside
/// `x`. Zero (up to tolerance) iff the operator is supported in `x` (even
/// sector). On charge-sector spaces only the diagonal (number) generators
/// are available, which tests charge-transfer across the boundary of `x`.
double support_check(const ManyBodySpace& space, const DenseMatrix& a,
                     const Region& x);
double support_check(const ManyBodySpace& space, const SparseMatrix& a,
                     const Region& x);

/// Conditional expectation onto operators supported in `x`, taken in the
/// occupation basis: matrix elements that change the configuration outside
/// `x` are dropped, and the retained blocks are averaged over the outside
/// configuration. On a full space this is exactly the normalized partial
/// trace over the complement; on a charge sector it is the restriction of
/// that map to the sector. The result commutes with every charge operator
/// outside `x`.
DenseMatrix localize_to_region(const ManyBodySpace& space,
                               const DenseMatrix& a, const Region& x);

Complex expectation(const DenseVector& psi, const DenseMatrix& a);
Complex expectation(const DenseVector& psi, const SparseMatrix& a);

/// ||(A - <psi,A psi>) psi||^2
double variance(const DenseVector& psi, const DenseMatrix& a);
double variance(const DenseVector& psi, const SparseMatrix& a);
double variance_applied(const DenseVector& psi, const DenseVector& a_psi);

DenseMatrix commutator(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace fluxlab
