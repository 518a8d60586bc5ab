#include "fluxlab/models.hpp"

#include <cmath>
#include <limits>

namespace fluxlab {

namespace {
int parity(int coord) { return ((coord % 2) + 2) % 2 == 0 ? 1 : -1; }
}  // namespace

ModelSystem xx_chain_model(int length, double coupling, double field) {
  ModelSystem m;
  m.spec.kind = ParticleKind::Spin;
  m.spec.local_dim = 2;
  m.spec.lattice = TorusLattice(1, length);
  m.spec.charge_per_level = {0, 1};  // Q = S^z + 1/2
  const auto& lat = m.spec.lattice;
  const DenseMatrix sp = spin_raise();
  const DenseMatrix sm = sp.adjoint();
  for (int s = 0; s < length; ++s) {
    const int nxt = lat.site_at({lat.coordinate(s, 1) + 1});
    // (J/2)(S+ S- + S- S+)
    m.terms.push_back(spin_two_site_term("xx_" + std::to_string(s), s, nxt, sp,
                                         sm, coupling / 2.0, true));
    DenseMatrix z = -0.5 * field * pauli_z();
    m.terms.push_back(spin_site_term("field_" + std::to_string(s), s, z));
  }
  return m;
}

ModelSystem heisenberg_chain_model(int length, double coupling) {
  ModelSystem m;
  m.spec.kind = ParticleKind::Spin;
  m.spec.local_dim = 2;
  m.spec.lattice = TorusLattice(1, length);
  m.spec.charge_per_level = {0, 1};
  const auto& lat = m.spec.lattice;
  const DenseMatrix sp = spin_raise();
  const DenseMatrix sm = sp.adjoint();
  const DenseMatrix sz = 0.5 * pauli_z();
  for (int s = 0; s < length; ++s) {
    const int nxt = lat.site_at({lat.coordinate(s, 1) + 1});
    m.terms.push_back(spin_two_site_term("hxy_" + std::to_string(s), s, nxt,
                                         sp, sm, coupling / 2.0, true));
    m.terms.push_back(spin_two_site_term("hzz_" + std::to_string(s), s, nxt,
                                         sz, sz, coupling, false));
  }
  return m;
}

ModelSystem fermion_chain_model(int length, double hopping, double dimer,
                                double stagger, double mu, double total_flux) {
  ModelSystem m;
  m.spec.kind = ParticleKind::Fermion;
  m.spec.local_dim = 1;
  m.spec.lattice = TorusLattice(1, length);
  m.spec.charge_per_level = {1};
  const auto& lat = m.spec.lattice;
  const Complex bond_phase = std::exp(Complex(0, total_flux / length));
  for (int s = 0; s < length; ++s) {
    const int x = lat.coordinate(s, 1);
    const int nxt = lat.site_at({x + 1});
    const Complex amp = -(hopping + parity(x) * dimer) * bond_phase;
    if (std::abs(amp) > 1e-15) {
      m.terms.push_back(hopping_term("hop_" + std::to_string(s), s, nxt, amp));
    }
    const double onsite = parity(x) * stagger - mu;
    m.terms.push_back(number_term("onsite_" + std::to_string(s), s, onsite));
  }
  return m;
}

double flux_lattice_mu(int length, int flux_num, int flux_den, double tx,
                       double ty, int filled) {
  TorusLattice lat(2, length);
  EigenSystem sys = hermitian_eig(hofstadter_h(lat, flux_num, flux_den, tx, ty));
  return 0.5 * (sys.values(filled - 1) + sys.values(filled));
}

ModelSystem flux_lattice_model(int length, int flux_num, int flux_den,
                               double tx, double ty, int filled,
                               double interaction) {
  TorusLattice lat(2, length);
  const double mu = flux_lattice_mu(length, flux_num, flux_den, tx, ty, filled);
  ModelSystem m = one_particle_to_model(
      lat, hofstadter_h(lat, flux_num, flux_den, tx, ty), mu);
  if (interaction != 0.0) {
    for (int s = 0; s < lat.size(); ++s) {
      const int x = lat.coordinate(s, 1);
      const int y = lat.coordinate(s, 2);
      m.terms.push_back(density_density_term("int_x_" + std::to_string(s), s,
                                             lat.site_at({x + 1, y}),
                                             interaction));
      m.terms.push_back(density_density_term("int_y_" + std::to_string(s), s,
                                             lat.site_at({x, y + 1}),
                                             interaction));
    }
  }
  return m;
}

ModelSystem stacked_chains_model(int length, double t1, double t2) {
  ModelSystem m;
  m.spec.kind = ParticleKind::Fermion;
  m.spec.local_dim = 1;
  m.spec.lattice = TorusLattice(2, length);
  m.spec.charge_per_level = {1};
  const auto& lat = m.spec.lattice;
  for (int s = 0; s < lat.size(); ++s) {
    const int x = lat.coordinate(s, 1);
    const int y = lat.coordinate(s, 2);
    const int nxt = lat.site_at({x + 1, y});
    const double t = parity(x) == 1 ? t1 : t2;
    m.terms.push_back(
        hopping_term("hop_" + std::to_string(s), s, nxt, Complex(-t, 0)));
  }
  return m;
}

// ---------------------------------------------------------------------------

DenseMatrix translation_unitary(const ManyBodySpace& space, int axis) {
  const TorusLattice& lat = space.lattice();
  if (space.spec().kind == ParticleKind::Fermion) {
    if (space.spec().local_dim != 1) {
      throw ParameterError("translation_unitary: single-orbital fermions only");
    }
    std::vector<int> perm(lat.size());
    std::vector<Complex> phases(lat.size(), 1.0);
    for (int s = 0; s < lat.size(); ++s) {
      std::vector<int> coords(lat.dimension());
      for (int a = 1; a <= lat.dimension(); ++a) {
        coords[a - 1] = lat.coordinate(s, a);
      }
      coords[axis - 1] -= 1;
      perm[s] = lat.site_at(coords);
    }
    return second_quantized_permutation(space, perm, phases);
  }
  // spin: pure configuration permutation, level(x) <- level(x+1)
  const std::int64_t dim = space.dim();
  DenseMatrix u = DenseMatrix::Zero(dim, dim);
  for (std::int64_t col = 0; col < dim; ++col) {
    const std::uint64_t c = space.config(col);
    std::uint64_t target = c;
    for (int s = 0; s < lat.size(); ++s) {
      std::vector<int> coords(lat.dimension());
      for (int a = 1; a <= lat.dimension(); ++a) {
        coords[a - 1] = lat.coordinate(s, a);
      }
      coords[axis - 1] += 1;
      const int src = lat.site_at(coords);
      target = space.with_site_level(target, s, space.site_level(c, src));
    }
    auto idx = space.index_of(target);
    if (!idx) {
      throw ValidationError("translation_unitary: left the charge sector");
    }
    u(*idx, col) = 1.0;
  }
  return u;
}

double translation_invariance_residual(const ManyBodySpace& space,
                                       const SparseMatrix& h,
                                       const DenseMatrix& translation) {
  (void)space;
  const DenseMatrix c = h * translation - translation * h;
  return spectral_norm(c);
}

std::pair<DenseMatrix, DenseMatrix> translation_split(
    const ChargeFamily& family, int axis) {
  const TorusLattice& lat = family.space().lattice();
  auto layer = [&](int coord) {
    std::vector<int> sites;
    for (int s = 0; s < lat.size(); ++s) {
      if (lat.coordinate(s, axis) == coord) sites.push_back(s);
    }
    return Region(std::move(sites), axis);
  };
  const RealVector q0 = family.region_diagonal(layer(0));
  const RealVector qh = family.region_diagonal(layer(lat.side() / 2));
  return {DenseMatrix((-q0).cast<Complex>().asDiagonal()),
          DenseMatrix(qh.cast<Complex>().asDiagonal())};
}

// ---------------------------------------------------------------------------

double pump_dimer(const PumpCycle& c, double s) {
  const double dir = c.reverse ? -1.0 : 1.0;
  return c.dimer_center + c.scale * c.dimer_amp * std::cos(2.0 * M_PI * dir * s);
}

double pump_stagger(const PumpCycle& c, double s) {
  const double dir = c.reverse ? -1.0 : 1.0;
  return c.scale * c.stagger_amp * std::sin(2.0 * M_PI * dir * s);
}

std::vector<LocalTerm> rice_mele_terms(const TorusLattice& lat, double hopping,
                                       double dimer, double stagger) {
  std::vector<LocalTerm> terms;
  for (int s = 0; s < lat.size(); ++s) {
    const int x = lat.coordinate(s, 1);
    const int nxt = lat.site_at({x + 1});
    terms.push_back(hopping_term("hop_" + std::to_string(s), s, nxt,
                                 Complex(-(hopping + parity(x) * dimer), 0)));
    terms.push_back(
        number_term("onsite_" + std::to_string(s), s, parity(x) * stagger));
  }
  return terms;
}

ModelSystem rice_mele_model(int length, const PumpCycle& c, double s) {
  ModelSystem m;
  m.spec.kind = ParticleKind::Fermion;
  m.spec.local_dim = 1;
  m.spec.lattice = TorusLattice(1, length);
  m.spec.charge_per_level = {1};
  m.terms = rice_mele_terms(m.spec.lattice, c.hopping, pump_dimer(c, s),
                            pump_stagger(c, s));
  return m;
}

GeneratorPath pump_generator_path(std::shared_ptr<const ManyBodySpace> space,
                                  const PumpCycle& c, double gap_floor_min) {
  struct Cache {
    double s = std::numeric_limits<double>::quiet_NaN();
    EigenSystem eig;
    double gap = 0.0;
  };
  auto cache = std::make_shared<Cache>();
  const TorusLattice lat = space->lattice();

  GeneratorPath path;
  path.locality = LocalityClass::QuasiLocal;
  path.constant = false;
  path.summed = [space, lat, c, cache, gap_floor_min](
                    double s, const std::optional<Region>& restriction) {
    if (!(cache->s == s)) {
      SparseMatrix h = materialize_sum(
          *space,
          rice_mele_terms(lat, c.hopping, pump_dimer(c, s), pump_stagger(c, s)));
      cache->eig = hermitian_eig(DenseMatrix(h));
      cache->gap = cache->eig.values(1) - cache->eig.values(0);
      cache->s = s;
      if (cache->gap < gap_floor_min) {
        throw ConditioningError("pump path: gap closed at s=" +
                                std::to_string(s));
      }
    }
    // dH/ds with the cycle's chain rule
    const double dir = c.reverse ? -1.0 : 1.0;
    const double ddimer =
        -2.0 * M_PI * dir * c.scale * c.dimer_amp * std::sin(2.0 * M_PI * dir * s);
    const double dstagger =
        2.0 * M_PI * dir * c.scale * c.stagger_amp * std::cos(2.0 * M_PI * dir * s);
    std::vector<LocalTerm> dterms =
        rice_mele_terms(lat, 0.0, ddimer, dstagger);
    std::vector<LocalTerm> kept;
    for (auto& t : dterms) {
      if (!restriction || t.support.is_subset_of(*restriction)) {
        kept.push_back(std::move(t));
      }
    }
    if (kept.empty()) {
      return DenseMatrix(DenseMatrix::Zero(space->dim(), space->dim()));
    }
    SparseMatrix hdot = materialize_sum(*space, kept);
    return quasi_adiabatic_map(cache->eig, DenseMatrix(hdot),
                               std::max(cache->gap, gap_floor_min));
  };
  return path;
}

GeneratorPath propagator_path(std::shared_ptr<const ManyBodySpace> space,
                              const std::vector<LocalTerm>& terms,
                              double time) {
  GeneratorPath path;
  path.locality = LocalityClass::StrictlyLocal;
  path.constant = true;
  auto terms_copy = std::make_shared<std::vector<LocalTerm>>(terms);
  path.summed = [space, terms_copy, time](
                    double, const std::optional<Region>& restriction) {
    std::vector<LocalTerm> kept;
    for (const auto& t : *terms_copy) {
      if (!restriction || t.support.is_subset_of(*restriction)) {
        kept.push_back(t);
      }
    }
    if (kept.empty()) {
      return DenseMatrix(DenseMatrix::Zero(space->dim(), space->dim()));
    }
    return DenseMatrix(time * DenseMatrix(materialize_sum(*space, kept)));
  };
  return path;
}

}  // namespace fluxlab
