#include <catch2/catch_amalgamated.hpp>

#include "fluxlab/operators.hpp"

using namespace fluxlab;

namespace {

HilbertSpec spin_half_spec(int L) {
  HilbertSpec spec;
  spec.kind = ParticleKind::Spin;
  spec.local_dim = 2;
  spec.lattice = TorusLattice(1, L);
  spec.charge_per_level = {0, 1};
  return spec;
}

HilbertSpec fermion_spec(int L, int d = 1) {
  HilbertSpec spec;
  spec.kind = ParticleKind::Fermion;
  spec.local_dim = 1;
  spec.lattice = TorusLattice(d, L);
  spec.charge_per_level = {1};
  return spec;
}

}  // namespace

TEST_CASE("space dimensions") {
  REQUIRE(ManyBodySpace::full(spin_half_spec(4))->dim() == 16);
  REQUIRE(ManyBodySpace::full(fermion_spec(4))->dim() == 16);

  HilbertSpec s3 = spin_half_spec(4);
  s3.local_dim = 3;
  s3.charge_per_level = {0, 1, 2};
  REQUIRE(ManyBodySpace::full(s3)->dim() == 81);

  REQUIRE_THROWS_AS(ManyBodySpace::full(spin_half_spec(8), 1 << 4),
                    ResourceError);
}

TEST_CASE("charge sectors partition the space") {
  auto full = ManyBodySpace::full(fermion_spec(6));
  std::int64_t total = 0;
  for (int q = 0; q <= 6; ++q) {
    total += ManyBodySpace::charge_sector(fermion_spec(6), q)->dim();
  }
  REQUIRE(total == full->dim());
  auto half = ManyBodySpace::charge_sector(fermion_spec(6), 3);
  REQUIRE(half->dim() == 20);
  for (std::int64_t i = 0; i < half->dim(); ++i) {
    REQUIRE(half->total_charge_of(half->config(i)) == 3);
    REQUIRE(half->index_of(half->config(i)) == i);
  }
}

TEST_CASE("charge operators") {
  auto space = ManyBodySpace::full(spin_half_spec(4));
  ChargeFamily family(space);
  const auto& lat = space->lattice();

  // empty region -> zero
  REQUIRE(family.region_diagonal(Region(std::vector<int>{})).norm() == 0.0);

  // all-up state has charge |Lambda|
  RealVector q_all = family.region_diagonal(full_region(lat));
  const std::uint64_t all_up = 0b1111;
  REQUIRE(q_all(*space->index_of(all_up)) == 4.0);

  // fermion number on the half torus of L=4: eigenvalues {0,1,2}
  auto fsp = ManyBodySpace::full(fermion_spec(4));
  ChargeFamily ff(fsp);
  RealVector qg = ff.region_diagonal(half_torus(fsp->lattice(), 1));
  REQUIRE(qg.minCoeff() == 0.0);
  REQUIRE(qg.maxCoeff() == 2.0);

  // integer spectrum: e^{2 pi i Q_X} = 1
  for (Eigen::Index i = 0; i < qg.size(); ++i) {
    REQUIRE(std::abs(std::exp(Complex(0, 2 * M_PI * qg(i))) - 1.0) < 1e-12);
  }

  // additivity over the strip partition of the half torus
  Strips st = strips(TorusLattice(1, 8), 1);
  auto sp8 = ManyBodySpace::charge_sector(fermion_spec(8), 4);
  ChargeFamily f8(sp8);
  Region g = half_torus(sp8->lattice(), 1);
  RealVector sum =
      f8.region_diagonal(region_intersection(g, st.minus)) +
      f8.region_diagonal(region_intersection(g, st.middle)) +
      f8.region_diagonal(region_intersection(g, st.plus));
  REQUIRE((sum - f8.region_diagonal(g)).norm() == 0.0);
}

TEST_CASE("fermion algebra") {
  auto space = ManyBodySpace::full(fermion_spec(4));
  auto mono = [&](std::initializer_list<FermionOp> ops, Complex c = 1.0) {
    FermionTermData d;
    d.monomials.push_back({c, ops});
    LocalTerm t{"m", Region({0, 1, 2, 3}), d};
    return DenseMatrix(materialize(*space, t));
  };
  const DenseMatrix c0 = mono({{0, 0, false}});
  const DenseMatrix c0d = mono({{0, 0, true}});
  const DenseMatrix c1 = mono({{1, 0, false}});
  const DenseMatrix c1d = mono({{1, 0, true}});
  const Eigen::Index n = space->dim();

  // CAR
  REQUIRE((c0 * c0d + c0d * c0 - DenseMatrix::Identity(n, n)).norm() < 1e-14);
  REQUIRE((c0 * c1 + c1 * c0).norm() < 1e-14);
  REQUIRE((c0 * c1d + c1d * c0).norm() < 1e-14);

  // number operator spectrum {0,1}
  EigenSystem num = hermitian_eig(DenseMatrix(c0d * c0));
  REQUIRE(num.values.minCoeff() == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(num.values.maxCoeff() == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("support check") {
  auto space = ManyBodySpace::full(spin_half_spec(4));
  ChargeFamily family(space);
  const auto& lat = space->lattice();
  Region gamma = half_torus(lat, 1);

  // Q_Gamma commutes with generators outside Gamma
  RealVector qg = family.region_diagonal(gamma);
  SparseMatrix qmat(space->dim(), space->dim());
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Eigen::Index i = 0; i < qg.size(); ++i) trip.emplace_back(i, i, qg(i));
  qmat.setFromTriplets(trip.begin(), trip.end());
  REQUIRE(support_check(*space, qmat, gamma) < 1e-12);

  // S^x_0 does not commute with S^z_0
  SparseMatrix sx0 = materialize(*space, spin_site_term("sx", 0, pauli_x()));
  REQUIRE(support_check(*space, sx0, Region({1, 2, 3})) > 0.5);
  REQUIRE(support_check(*space, sx0, Region({0})) < 1e-12);

  // even fermion bilinear is supported on its two sites despite the string
  auto fsp = ManyBodySpace::full(fermion_spec(6));
  SparseMatrix bil = materialize(*fsp, hopping_term("hop", 1, 4, 1.0));
  REQUIRE(support_check(*fsp, bil, Region({1, 4})) < 1e-12);
}

TEST_CASE("hamiltonian assembly") {
  auto space = ManyBodySpace::full(spin_half_spec(4));
  ChargeFamily family(space);

  std::vector<LocalTerm> good;
  good.push_back(spin_two_site_term("xx01", 0, 1, spin_raise(),
                                    spin_raise().adjoint(), 0.5, true));
  LocalHamiltonian h = assemble_hamiltonian(*space, good, family);
  REQUIRE(h.charge_conserving);
  REQUIRE(h.range == 1);

  std::vector<LocalTerm> bad;
  bad.push_back(spin_site_term("sx0", 0, pauli_x()));
  REQUIRE_THROWS_AS(assemble_hamiltonian(*space, bad, family),
                    ValidationError);

  auto fsp = ManyBodySpace::full(fermion_spec(4));
  ChargeFamily ffam(fsp);
  std::vector<LocalTerm> hop;
  hop.push_back(hopping_term("hop01", 0, 1, Complex(0.3, 0.1)));
  REQUIRE_NOTHROW(assemble_hamiltonian(*fsp, hop, ffam));
}

TEST_CASE("commutator of H with the half-torus charge sits at the boundary") {
  // XX chain: [H, Q_Gamma] is supported within range R of the two boundaries
  auto space = ManyBodySpace::full(spin_half_spec(8));
  ChargeFamily family(space);
  const auto& lat = space->lattice();
  const DenseMatrix sp = spin_raise();
  std::vector<LocalTerm> terms;
  for (int s = 0; s < 8; ++s) {
    const int nxt = lat.site_at({lat.coordinate(s, 1) + 1});
    terms.push_back(
        spin_two_site_term("xx" + std::to_string(s), s, nxt, sp,
                           sp.adjoint(), 0.5, true));
  }
  SparseMatrix h = materialize_sum(*space, terms);
  RealVector qg = family.region_diagonal(half_torus(lat, 1));
  DenseMatrix comm = DenseMatrix(h) * qg.cast<Complex>().asDiagonal();
  comm -= DenseMatrix(qg.cast<Complex>().asDiagonal()) * DenseMatrix(h);
  auto [bm, bp] = boundaries(lat, 1);
  Region near_boundary =
      region_union(fatten(lat, bm, 1), fatten(lat, bp, 1));
  REQUIRE(support_check(*space, comm, near_boundary) < 1e-12);
}

TEST_CASE("localization map") {
  auto space = ManyBodySpace::full(spin_half_spec(4));
  Region x({0, 1});

  // an operator already supported in x is unchanged
  DenseMatrix a = DenseMatrix(materialize(
      *space, spin_two_site_term("xy", 0, 1, pauli_x(), pauli_y(), 0.7, false)));
  REQUIRE((localize_to_region(*space, a, x) - a).norm() < 1e-13);

  // idempotent
  DenseMatrix b = DenseMatrix(materialize(
      *space, spin_two_site_term("far", 1, 2, pauli_x(), pauli_x(), 1.0, false)));
  DenseMatrix lb = localize_to_region(*space, b, x);
  REQUIRE((localize_to_region(*space, lb, x) - lb).norm() < 1e-13);

  // result commutes with charges outside x
  ChargeFamily family(space);
  DenseMatrix qd =
      DenseMatrix(family.site_diagonal(2).cast<Complex>().asDiagonal());
  REQUIRE((lb * qd - qd * lb).norm() < 1e-13);
}
