#include "fluxlab/operators.hpp"

#include <unordered_map>

namespace fluxlab {

ManyBodyOperator::ManyBodyOperator(std::shared_ptr<const ManyBodySpace> space,
                                   DenseMatrix m, Region support,
                                   OperatorFlags flags, double tol)
    : space_(std::move(space)),
      m_(std::move(m)),
      support_(std::move(support)),
      flags_(flags) {
  verify_flags(tol);
}

ManyBodyOperator::ManyBodyOperator(std::shared_ptr<const ManyBodySpace> space,
                                   SparseMatrix m, Region support,
                                   OperatorFlags flags, double tol)
    : space_(std::move(space)),
      m_(std::move(m)),
      support_(std::move(support)),
      flags_(flags) {
  verify_flags(tol);
}

DenseMatrix ManyBodyOperator::to_dense() const {
  return is_dense() ? dense() : DenseMatrix(sparse());
}

DenseVector ManyBodyOperator::apply(const DenseVector& v) const {
  return is_dense() ? DenseVector(dense() * v) : DenseVector(sparse() * v);
}

void ManyBodyOperator::verify_flags(double tol) const {
  if (flags_.hermitian) {
    const double resid =
        is_dense() ? spectral_norm(DenseMatrix(dense() - dense().adjoint()))
                   : spectral_norm(
                         SparseMatrix(sparse() - SparseMatrix(sparse().adjoint())));
    if (resid > tol) {
      throw ValidationError("operator flagged hermitian is not hermitian");
    }
  }
  if (flags_.unitary) {
    const Eigen::Index n =
        is_dense() ? dense().rows() : sparse().rows();
    DenseMatrix g = is_dense() ? DenseMatrix(dense().adjoint() * dense())
                               : DenseMatrix(SparseMatrix(
                                     sparse().adjoint() * sparse()));
    g -= DenseMatrix::Identity(n, n);
    if (spectral_norm(g) > tol) {
      throw ValidationError("operator flagged unitary is not unitary");
    }
  }
}

namespace {

std::vector<LocalTerm> site_generators(const ManyBodySpace& space, int site) {
  std::vector<LocalTerm> gens;
  const auto& spec = space.spec();
  if (spec.kind == ParticleKind::Spin) {
    const int n = spec.local_dim;
    for (int a = 0; a < n; ++a) {
      DenseMatrix e = DenseMatrix::Zero(n, n);
      e(a, a) = 1.0;
      gens.push_back(spin_site_term("gen_diag", site, e));
      for (int b = a + 1; b < n; ++b) {
        DenseMatrix re = DenseMatrix::Zero(n, n);
        re(a, b) = re(b, a) = 1.0;
        gens.push_back(spin_site_term("gen_re", site, re));
        DenseMatrix im = DenseMatrix::Zero(n, n);
        im(a, b) = Complex(0, -1);
        im(b, a) = Complex(0, 1);
        gens.push_back(spin_site_term("gen_im", site, im));
      }
    }
  } else {
    for (int orb = 0; orb < spec.local_dim; ++orb) {
      if (!space.is_sector()) {
        FermionTermData re;
        re.monomials.push_back({1.0, {{site, orb, true}}});
        re.monomials.push_back({1.0, {{site, orb, false}}});
        LocalTerm t1{"gen_majorana_re", Region({site}), re};
        gens.push_back(t1);
        FermionTermData im;
        im.monomials.push_back({Complex(0, 1), {{site, orb, false}}});
        im.monomials.push_back({Complex(0, -1), {{site, orb, true}}});
        LocalTerm t2{"gen_majorana_im", Region({site}), im};
        gens.push_back(t2);
      }
      FermionTermData nn;
      nn.monomials.push_back({1.0, {{site, orb, true}, {site, orb, false}}});
      LocalTerm t3{"gen_number", Region({site}), nn};
      gens.push_back(t3);
    }
  }
  return gens;
}

template <typename Matrix>
double support_check_impl(const ManyBodySpace& space, const Matrix& a,
                          const Region& x) {
  double worst = 0.0;
  for (int site = 0; site < space.lattice().size(); ++site) {
    if (x.contains(site)) continue;
    for (const auto& gen : site_generators(space, site)) {
      SparseMatrix g = materialize(space, gen);
      Matrix c = a * g - g * a;
      worst = std::max(worst, spectral_norm(c));
    }
  }
  return worst;
}

}  // namespace

double support_check(const ManyBodySpace& space, const DenseMatrix& a,
                     const Region& x) {
  return support_check_impl(space, a, x);
}

double support_check(const ManyBodySpace& space, const SparseMatrix& a,
                     const Region& x) {
  return support_check_impl(space, a, x);
}

DenseMatrix localize_to_region(const ManyBodySpace& space,
                               const DenseMatrix& a, const Region& x) {
  const std::int64_t dim = space.dim();
  const int sites = space.lattice().size();
  const int levels = space.spec().site_levels();

  // split each configuration into (pattern on x, pattern outside x)
  std::vector<std::uint64_t> xkey(dim), ekey(dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    const std::uint64_t c = space.config(i);
    std::uint64_t xk = 0, ek = 0;
    std::uint64_t xs = 1, es = 1;
    for (int s = 0; s < sites; ++s) {
      const std::uint64_t lvl = space.site_level(c, s);
      if (x.contains(s)) {
        xk += lvl * xs;
        xs *= levels;
      } else {
        ek += lvl * es;
        es *= levels;
      }
    }
    xkey[i] = xk;
    ekey[i] = ek;
  }

  std::unordered_map<std::uint64_t, int> xid;
  for (std::int64_t i = 0; i < dim; ++i) {
    xid.emplace(xkey[i], static_cast<int>(xid.size()));
  }
  const int nx = static_cast<int>(xid.size());
  std::vector<int> xi(dim);
  for (std::int64_t i = 0; i < dim; ++i) xi[i] = xid[xkey[i]];

  std::unordered_map<std::uint64_t, std::vector<std::int64_t>> egroups;
  for (std::int64_t i = 0; i < dim; ++i) egroups[ekey[i]].push_back(i);

  DenseMatrix sum = DenseMatrix::Zero(nx, nx);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(nx, nx);
  for (const auto& [key, members] : egroups) {
    (void)key;
    for (std::int64_t i : members) {
      for (std::int64_t j : members) {
        sum(xi[i], xi[j]) += a(i, j);
        count(xi[i], xi[j]) += 1.0;
      }
    }
  }

  DenseMatrix out = DenseMatrix::Zero(dim, dim);
  for (const auto& [key, members] : egroups) {
    (void)key;
    for (std::int64_t i : members) {
      for (std::int64_t j : members) {
        out(i, j) = sum(xi[i], xi[j]) / count(xi[i], xi[j]);
      }
    }
  }
  return out;
}

Complex expectation(const DenseVector& psi, const DenseMatrix& a) {
  return psi.dot(a * psi);
}

Complex expectation(const DenseVector& psi, const SparseMatrix& a) {
  return psi.dot(a * psi);
}

double variance_applied(const DenseVector& psi, const DenseVector& a_psi) {
  const Complex mean = psi.dot(a_psi);
  return (a_psi - mean * psi).squaredNorm();
}

double variance(const DenseVector& psi, const DenseMatrix& a) {
  return variance_applied(psi, DenseVector(a * psi));
}

double variance(const DenseVector& psi, const SparseMatrix& a) {
  return variance_applied(psi, DenseVector(a * psi));
}

DenseMatrix commutator(const DenseMatrix& a, const DenseMatrix& b) {
  return a * b - b * a;
}

}  // namespace fluxlab
