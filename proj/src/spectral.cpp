#include "fluxlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fluxlab {

namespace {

std::pair<int, int> charge_range(const HilbertSpec& spec) {
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  for (int lvl = 0; lvl < spec.site_levels(); ++lvl) {
    lo = std::min(lo, spec.level_charge(lvl));
    hi = std::max(hi, spec.level_charge(lvl));
  }
  return {lo * spec.lattice.size(), hi * spec.lattice.size()};
}

}  // namespace

SpectralData ground_state(const ModelSystem& model,
                          const GroundStateOptions& opts) {
  const auto [qlo, qhi] = charge_range(model.spec);
  SpectralData out;
  double best_e0 = std::numeric_limits<double>::infinity();
  int best_charge = 0;
  std::shared_ptr<const ManyBodySpace> best_space;
  SparseMatrix best_h;
  DenseVector best_vec;

  for (int q = qlo; q <= qhi; ++q) {
    auto sector = ManyBodySpace::charge_sector(model.spec, q,
                                               opts.dimension_cap);
    if (sector->dim() == 0) continue;
    SparseMatrix h = materialize_sum(*sector, model.terms);
    SectorScanEntry entry;
    entry.charge = q;
    entry.dim = sector->dim();
    if (sector->dim() == 1) {
      entry.e0 = std::real(h.coeff(0, 0));
      entry.e1 = std::numeric_limits<double>::quiet_NaN();
      if (entry.e0 < best_e0) {
        best_e0 = entry.e0;
        best_charge = q;
        best_space = sector;
        best_h = h;
        best_vec = DenseVector::Ones(1);
      }
    } else {
      EigenSystem low;
      if (sector->dim() <= opts.dense_threshold) {
        EigenSystem full = hermitian_eig(DenseMatrix(h));
        low.values = full.values.head(2);
        low.vectors = full.vectors.leftCols(2);
      } else {
        low = lowest_eigenpairs(h, 2);
      }
      entry.e0 = low.values(0);
      entry.e1 = low.values(1);
      if (entry.e0 < best_e0) {
        best_e0 = entry.e0;
        best_charge = q;
        best_space = sector;
        best_h = h;
        best_vec = low.vectors.col(0);
      }
    }
    out.scan.push_back(entry);
  }
  if (!best_space) throw SolverError("ground_state: no nonempty sector");

  double next = std::numeric_limits<double>::infinity();
  for (const auto& e : out.scan) {
    if (e.charge == best_charge && e.dim > 1 && std::isfinite(e.e1)) {
      next = std::min(next, e.e1);
    }
    if (e.charge != best_charge) next = std::min(next, e.e0);
  }

  out.space = best_space;
  out.hamiltonian = best_h;
  out.ground = best_vec.normalized();
  out.ground_energy = best_e0;
  out.gap = std::isfinite(next) ? next - best_e0 : 0.0;
  out.degenerate = out.gap < opts.degeneracy_tol;

  if (opts.want_full_eig && best_space->dim() <= opts.full_eig_cap) {
    EigenSystem full = hermitian_eig(DenseMatrix(best_h));
    full.values.array() -= best_e0;
    out.eig = std::move(full);
    // replace the Lanczos vector with the dense one for consistency
    out.ground = out.eig->vectors.col(0);
  }
  return out;
}

UnitaryVariance unitary_variance(const DenseVector& psi,
                                 const DenseMatrix& u) {
  UnitaryVariance out;
  const DenseVector upsi = u * psi;
  out.variance = variance_applied(psi, upsi);
  out.one_minus_overlap_sq = 1.0 - std::norm(psi.dot(upsi));
  return out;
}

// ---------------------------------------------------------------------------

ClusteringFit clustering_fit(const SpectralData& s, const ChargeFamily& family,
                             int axis, const ClusteringOptions& opts) {
  const auto& space = *s.space;
  const TorusLattice& lat = space.lattice();
  const int L = lat.side();
  const int max_sep = L / 2;
  if (max_sep - 2 + 1 < opts.min_separations) {
    throw ParameterError("clustering_fit: fewer than 3 separations available");
  }

  auto site_at_coord = [&](int c) {
    std::vector<int> coords(lat.dimension(), 0);
    coords[axis - 1] = c;
    return lat.site_at(coords);
  };

  // density probe diagonals and bond probe matrices at each axis coordinate
  auto bond_at = [&](int c) {
    const int a = site_at_coord(c);
    std::vector<int> coords(lat.dimension(), 0);
    coords[axis - 1] = c + 1;
    const int b = lat.site_at(coords);
    if (space.spec().kind == ParticleKind::Fermion) {
      return materialize(space, hopping_term("probe_bond", a, b, 1.0));
    }
    return materialize(space, spin_two_site_term("probe_bond", a, b,
                                                 spin_raise(),
                                                 spin_raise().adjoint(), 1.0,
                                                 true));
  };

  const DenseVector& psi = s.ground;
  Eigen::VectorXd weights = psi.cwiseAbs2();

  ClusteringFit fit;
  const RealVector d0 = family.site_diagonal(site_at_coord(0));
  const double mean_d0 = weights.dot(d0);
  const SparseMatrix b0 = bond_at(0);
  const DenseVector b0psi = b0 * psi;
  const Complex mean_b0 = psi.dot(b0psi);

  for (int r = 2; r <= max_sep; ++r) {
    const RealVector dr = family.site_diagonal(site_at_coord(r));
    const double mean_dr = weights.dot(dr);
    const double dd = weights.dot(RealVector(d0.cwiseProduct(dr)));
    const double corr_density = std::abs(dd - mean_d0 * mean_dr);

    const SparseMatrix br = bond_at(r);
    const Complex bb = psi.dot(DenseVector(br * b0psi));
    const Complex mean_br = psi.dot(DenseVector(br * psi));
    const double corr_bond = std::abs(bb - mean_b0 * mean_br);

    fit.samples.emplace_back(r, std::max(corr_density, corr_bond));
  }

  std::vector<std::pair<double, double>> pts;
  for (const auto& [r, v] : fit.samples) {
    if (v > opts.noise_floor) pts.emplace_back(r, std::log(v));
  }
  if (static_cast<int>(pts.size()) < opts.min_separations) {
    fit.all_below_floor = true;
    fit.rate = std::numeric_limits<double>::infinity();
    fit.pass = true;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  fit.rate = -slope;
  fit.amplitude = std::exp(intercept);
  double ss = 0;
  for (auto& [x, y] : pts) {
    const double resid = y - (intercept + slope * x);
    ss += resid * resid;
  }
  fit.rms_log_residual = std::sqrt(ss / n);
  fit.pass = fit.rate >= opts.c_min &&
             fit.rms_log_residual <= opts.max_rms_log_residual;
  return fit;
}

// ---------------------------------------------------------------------------

DenseMatrix quasi_adiabatic_map(const EigenSystem& shifted_eig,
                                const DenseMatrix& a, double gap_floor) {
  if (gap_floor < 1e-6) {
    throw ConditioningError(
        "quasi_adiabatic_map: spectral gap below the conditioning floor");
  }
  const auto& v = shifted_eig.vectors;
  const auto& e = shifted_eig.values;
  DenseMatrix at = v.adjoint() * a * v;
  const Eigen::Index n = e.size();
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double w = e(m) - e(k);
      Complex f;
      if (std::abs(w) >= gap_floor) {
        f = Complex(0, 1.0 / w);
      } else {
        f = Complex(0, w / (gap_floor * gap_floor));
      }
      at(m, k) *= f;
    }
  }
  return v * at * v.adjoint();
}

DenseMatrix quasi_adiabatic_map_time_domain(const EigenSystem& shifted_eig,
                                            const DenseMatrix& a,
                                            double kernel_width,
                                            int quadrature_points,
                                            double t_max_sigmas) {
  const auto& v = shifted_eig.vectors;
  const auto& e = shifted_eig.values;
  DenseMatrix at = v.adjoint() * a * v;
  const double t_max = t_max_sigmas / kernel_width;
  const double dt = 2.0 * t_max / quadrature_points;
  const Eigen::Index n = e.size();
  DenseMatrix acc = DenseMatrix::Zero(n, n);
  for (int k = 0; k < quadrature_points; ++k) {
    const double t = -t_max + (k + 0.5) * dt;
    const double w =
        0.5 * (t > 0 ? 1.0 : -1.0) *
        std::erfc(kernel_width * std::abs(t) / std::sqrt(2.0));
    for (Eigen::Index m = 0; m < n; ++m) {
      for (Eigen::Index l = 0; l < n; ++l) {
        acc(m, l) += w * dt * std::exp(Complex(0, t * (e(m) - e(l)))) * at(m, l);
      }
    }
  }
  return v * acc * v.adjoint();
}

// ---------------------------------------------------------------------------

BoundaryCurrents boundary_currents(const ManyBodySpace& space,
                                   const LocalHamiltonian& ham,
                                   const ChargeFamily& family, int axis) {
  const TorusLattice& lat = space.lattice();
  const RealVector q = family.region_diagonal(half_torus(lat, axis));
  auto [bm, bp] = boundaries(lat, axis);
  const int r = std::max(1, ham.range);
  const Region fat_m = fatten(lat, bm, r);
  const Region fat_p = fatten(lat, bp, r);

  std::vector<Eigen::Triplet<Complex>> tm, tp;
  for (const auto& term : ham.terms) {
    SparseMatrix m = materialize(space, term);
    double comm_norm = 0.0;
    std::vector<Eigen::Triplet<Complex>> local;
    for (int k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        // i[H,Q] elementwise: i * m_ij * (q_j - q_i)
        const Complex val =
            Complex(0, 1) * it.value() * (q(it.col()) - q(it.row()));
        if (std::abs(val) > 1e-15) {
          local.emplace_back(it.row(), it.col(), val);
          comm_norm = std::max(comm_norm, std::abs(val));
        }
      }
    }
    if (comm_norm <= 1e-14) continue;
    const bool in_m = term.support.is_subset_of(fat_m);
    const bool in_p = term.support.is_subset_of(fat_p);
    bool to_minus;
    if (in_m && !in_p) {
      to_minus = true;
    } else if (in_p && !in_m) {
      to_minus = false;
    } else if (in_m && in_p) {
      const int dm = d1_distance(lat, term.support, bm, axis);
      const int dp = d1_distance(lat, term.support, bp, axis);
      if (dm == dp) {
        throw ConsistencyError("boundary_currents: ambiguous attribution of '" +
                               term.name + "'");
      }
      to_minus = dm < dp;
    } else {
      throw ConsistencyError(
          "boundary_currents: term '" + term.name +
          "' does not commute with Q but sits near neither boundary");
    }
    auto& sink = to_minus ? tm : tp;
    sink.insert(sink.end(), local.begin(), local.end());
  }

  BoundaryCurrents out;
  out.j_minus.resize(space.dim(), space.dim());
  out.j_plus.resize(space.dim(), space.dim());
  out.j_minus.setFromTriplets(tm.begin(), tm.end());
  out.j_plus.setFromTriplets(tp.begin(), tp.end());
  out.support_minus = fat_m;
  out.support_plus = fat_p;
  return out;
}

namespace {

LocalTerm bond_probe(const ManyBodySpace& space, int site_a, int site_b) {
  if (space.spec().kind == ParticleKind::Fermion) {
    return hopping_term("probe", site_a, site_b, 1.0);
  }
  return spin_two_site_term("probe", site_a, site_b, spin_raise(),
                            spin_raise().adjoint(), 1.0, true);
}

std::vector<std::pair<int, double>> locality_profile(
    const ManyBodySpace& space, const DenseMatrix& k, const Region& boundary,
    int axis, int max_distance) {
  const TorusLattice& lat = space.lattice();
  const int bcoord = lat.coordinate(boundary.sites().front(), axis);
  std::vector<std::pair<int, double>> profile;
  for (int d = 0; d <= max_distance; ++d) {
    std::vector<int> ca(lat.dimension(), 0), cb(lat.dimension(), 0);
    ca[axis - 1] = bcoord + d;
    cb[axis - 1] = bcoord + d + 1;
    const int site_a = lat.site_at(ca);
    const int site_b = lat.site_at(cb);
    SparseMatrix p = materialize(space, bond_probe(space, site_a, site_b));
    DenseMatrix c = k * p - p * k;
    profile.emplace_back(d, spectral_norm(c));
  }
  return profile;
}

}  // namespace

Dressing dressing_operators(const SpectralData& s, const LocalHamiltonian& ham,
                            const ChargeFamily& family, int axis,
                            const DressingOptions& opts) {
  if (!s.eig) {
    throw ConditioningError(
        "dressing_operators: full eigendecomposition unavailable");
  }
  if (s.degenerate) {
    throw ConditioningError("dressing_operators: degenerate ground state");
  }
  const double gap_floor = std::max(s.gap, opts.gap_floor_min);
  const auto& space = *s.space;
  const TorusLattice& lat = space.lattice();

  BoundaryCurrents bc = boundary_currents(space, ham, family, axis);
  // K = i I([Q,H]) reproduces the off-diagonal ground-row elements of Q;
  // in the current convention [Q,H] = i J, hence K = -I(J).
  Dressing d;
  d.k_minus = -quasi_adiabatic_map(*s.eig, DenseMatrix(bc.j_minus), gap_floor);
  d.k_plus = -quasi_adiabatic_map(*s.eig, DenseMatrix(bc.j_plus), gap_floor);

  Strips st = strips(lat, axis);
  d.strip_minus = st.minus;
  d.strip_plus = st.plus;
  d.k_minus_local = localize_to_region(space, d.k_minus, st.minus);
  d.k_plus_local = localize_to_region(space, d.k_plus, st.plus);
  d.local_error_minus = spectral_norm(DenseMatrix(d.k_minus - d.k_minus_local));
  d.local_error_plus = spectral_norm(DenseMatrix(d.k_plus - d.k_plus_local));

  const RealVector q = family.region_diagonal(half_torus(lat, axis));
  const DenseVector& psi = s.ground;
  const DenseVector applied = psi.cwiseProduct(q.cast<Complex>());
  d.var_qbar = variance_applied(
      psi, DenseVector(applied - d.k_minus * psi - d.k_plus * psi));
  d.var_qbar_local = variance_applied(
      psi,
      DenseVector(applied - d.k_minus_local * psi - d.k_plus_local * psi));

  d.norm_per_volume_minus = spectral_norm(d.k_minus) / lat.size();
  d.norm_per_volume_plus = spectral_norm(d.k_plus) / lat.size();

  const int max_d =
      opts.locality_max_distance >= 0 ? opts.locality_max_distance
                                      : lat.side() / 4;
  auto [bm, bp] = boundaries(lat, axis);
  d.locality_minus = locality_profile(space, d.k_minus, bm, axis, max_d);
  d.locality_plus = locality_profile(space, d.k_plus, bp, axis, max_d);
  return d;
}

std::vector<AlmostLocalProfile> almost_local_check(
    const ManyBodySpace& space, const DenseMatrix& u,
    const std::vector<LocalTerm>& probes, int max_radius) {
  std::vector<AlmostLocalProfile> out;
  for (const auto& probe : probes) {
    SparseMatrix a = materialize(space, probe);
    const double scale = spectral_norm(a) * probe.support.size();
    DenseMatrix conj = u.adjoint() * a * u;
    AlmostLocalProfile prof;
    prof.probe_support = probe.support;
    for (int n = 0; n <= max_radius; ++n) {
      const Region fat = fatten(space.lattice(), probe.support, n);
      DenseMatrix rn = localize_to_region(space, conj, fat);
      prof.residual_per_radius.push_back(
          spectral_norm(DenseMatrix(conj - rn)) / std::max(scale, 1e-300));
    }
    out.push_back(std::move(prof));
  }
  return out;
}

double ground_state_current(const SpectralData& s, const LocalHamiltonian& ham,
                            const ChargeFamily& family, int axis) {
  BoundaryCurrents bc = boundary_currents(*s.space, ham, family, axis);
  return std::real(expectation(s.ground, bc.j_minus));
}

}  // namespace fluxlab
