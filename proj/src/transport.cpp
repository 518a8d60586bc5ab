#include "fluxlab/transport.hpp"

#include <algorithm>
#include <cmath>

namespace fluxlab {

namespace {

constexpr double kGaussLo = 0.5 - 0.28867513459481288;  // 1/2 - sqrt(3)/6
constexpr double kGaussHi = 0.5 + 0.28867513459481288;
// coefficients for the 4th-order two-exponential scheme
constexpr double kAlpha = 0.25 + 0.28867513459481288;  // 1/4 + sqrt(3)/6
constexpr double kBeta = 0.25 - 0.28867513459481288;   // 1/4 - sqrt(3)/6

DenseMatrix polar_unitary(const DenseMatrix& u) {
  EigenSystem g = hermitian_eig(DenseMatrix(u.adjoint() * u));
  DenseVector inv_sqrt(g.values.size());
  for (Eigen::Index i = 0; i < g.values.size(); ++i) {
    inv_sqrt(i) = 1.0 / std::sqrt(std::max(g.values(i), 1e-300));
  }
  return u * g.vectors * inv_sqrt.asDiagonal() * g.vectors.adjoint();
}

std::vector<DenseMatrix> run_steps(
    const GeneratorPath& path,
    const std::vector<std::optional<Region>>& restrictions, int steps) {
  const double h = 1.0 / steps;
  std::vector<DenseMatrix> us;
  std::vector<bool> started(restrictions.size(), false);
  us.resize(restrictions.size());
  for (int k = 0; k < steps; ++k) {
    const double t0 = k * h;
    const double s1 = t0 + kGaussLo * h;
    const double s2 = t0 + kGaussHi * h;
    for (size_t r = 0; r < restrictions.size(); ++r) {
      const DenseMatrix g1 = path.summed(s1, restrictions[r]);
      const DenseMatrix g2 = path.summed(s2, restrictions[r]);
      const DenseMatrix e1 =
          hermitian_exp(DenseMatrix(h * (kAlpha * g1 + kBeta * g2)),
                        Complex(0, -1));
      const DenseMatrix e2 =
          hermitian_exp(DenseMatrix(h * (kBeta * g1 + kAlpha * g2)),
                        Complex(0, -1));
      if (!started[r]) {
        us[r] = e2 * e1;
        started[r] = true;
      } else {
        us[r] = e2 * e1 * us[r];
      }
    }
  }
  return us;
}

}  // namespace

std::vector<EvolveResult> evolve_generator_multi(
    const GeneratorPath& path,
    const std::vector<std::optional<Region>>& restrictions,
    const EvolveOptions& opts) {
  std::vector<EvolveResult> out(restrictions.size());
  if (path.constant) {
    for (size_t r = 0; r < restrictions.size(); ++r) {
      const DenseMatrix g = path.summed(0.0, restrictions[r]);
      out[r].u = hermitian_exp(g, Complex(0, -1));
      out[r].steps = 1;
      out[r].error_estimate = 0.0;
    }
    return out;
  }

  int steps = opts.base_steps;
  std::vector<DenseMatrix> prev = run_steps(path, restrictions, steps);
  while (true) {
    steps *= 2;
    if (steps > opts.max_steps) {
      throw IntegratorError(
          "evolve_generator: step doubling did not reach the target error");
    }
    std::vector<DenseMatrix> cur = run_steps(path, restrictions, steps);
    double err = 0.0;
    for (size_t r = 0; r < restrictions.size(); ++r) {
      err = std::max(err, (cur[r] - prev[r]).norm());
    }
    if (err <= opts.target_error) {
      for (size_t r = 0; r < restrictions.size(); ++r) {
        out[r].u = std::move(cur[r]);
        const Eigen::Index n = out[r].u.rows();
        const double drift =
            (out[r].u.adjoint() * out[r].u - DenseMatrix::Identity(n, n))
                .norm();
        if (drift > opts.unitarity_tol) out[r].u = polar_unitary(out[r].u);
        out[r].steps = steps;
        out[r].error_estimate = err;
      }
      return out;
    }
    prev = std::move(cur);
  }
}

EvolveResult evolve_generator(const GeneratorPath& path,
                              const std::optional<Region>& restriction,
                              const EvolveOptions& opts) {
  return evolve_generator_multi(path, {restriction}, opts)[0];
}

// ---------------------------------------------------------------------------

Calibration calibrate_nu(const RealVector& spectrum, double fail_threshold) {
  if (spectrum.size() == 0) throw ParameterError("calibrate_nu: empty spectrum");
  std::vector<double> f(spectrum.size());
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    f[i] = spectrum(i) - std::floor(spectrum(i));
  }
  std::sort(f.begin(), f.end());
  const int n = static_cast<int>(f.size());
  // largest gap on the circle; the points live on the complementary arc
  double best_gap = f.front() + 1.0 - f.back();
  int arc_start = 0;  // index of the first point of the occupied arc
  for (int i = 1; i < n; ++i) {
    const double gap = f[i] - f[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      arc_start = i;
    }
  }
  Calibration cal;
  cal.achieved_distance = (1.0 - best_gap) / 2.0;
  double nu = f[arc_start] + cal.achieved_distance;
  nu -= std::floor(nu);
  cal.nu = nu;
  if (cal.achieved_distance >= fail_threshold) {
    throw CalibrationError(
        "calibrate_nu: no shift brings the spectrum within " +
        std::to_string(fail_threshold) + " of the integers (achieved " +
        std::to_string(cal.achieved_distance) + ")");
  }
  return cal;
}

namespace {

DenseMatrix conjugated_diagonal(const DenseMatrix& u, const RealVector& q) {
  const DenseVector qc = q.cast<Complex>();
  return u.adjoint() * (qc.asDiagonal() * u);
}

double exp_constraint_residual(const DenseMatrix& a) {
  // ||e^{2pi i A} - 1|| from the spectrum of the hermitian A
  EigenSystem sys = hermitian_eig(a);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    worst = std::max(worst, 2.0 * std::abs(std::sin(
                                M_PI * int_distance(sys.values(i)))));
  }
  return worst;
}

}  // namespace

TransportSplit transport_operators(std::shared_ptr<const ManyBodySpace> space,
                                   const GeneratorPath& path,
                                   const ChargeFamily& family, int axis,
                                   const TransportOptions& opts) {
  const TorusLattice& lat = space->lattice();
  const int L = lat.side();
  const int radius = opts.restriction_radius >= 0 ? opts.restriction_radius
                                                  : (L + 11) / 12;
  auto [bm, bp] = boundaries(lat, axis);
  const Region restrict_m = fatten(lat, bm, radius);
  const Region restrict_p = fatten(lat, bp, radius);

  auto evs = evolve_generator_multi(
      path, {std::nullopt, restrict_m, restrict_p}, opts.evolve);
  DenseMatrix& u = evs[0].u;
  DenseMatrix& u_m = evs[1].u;
  DenseMatrix& u_p = evs[2].u;

  const Region gamma = half_torus(lat, axis);
  const RealVector q = family.region_diagonal(gamma);
  const DenseMatrix q_diag = DenseMatrix(q.cast<Complex>().asDiagonal());

  DenseMatrix t_minus_raw = conjugated_diagonal(u_m, q) - q_diag;
  DenseMatrix t_plus_raw = conjugated_diagonal(u_p, q) - q_diag;

  TransportSplit split;
  split.u = u;
  split.evolve_steps = evs[0].steps;
  split.evolve_error = evs[0].error_estimate;

  Strips st = strips(lat, axis);
  split.strip_minus = st.minus;
  split.strip_plus = st.plus;
  split.restriction_minus = restrict_m;
  split.restriction_plus = restrict_p;

  const RealVector q_m =
      family.region_diagonal(region_intersection(gamma, st.minus));
  const RealVector q_p =
      family.region_diagonal(region_intersection(gamma, st.plus));

  // equality with the strip-charge form U*Q_+-U - Q_+-
  const double eq_m = spectral_norm(DenseMatrix(
      conjugated_diagonal(u_m, q_m) -
      DenseMatrix(q_m.cast<Complex>().asDiagonal()) - t_minus_raw));
  const double eq_p = spectral_norm(DenseMatrix(
      conjugated_diagonal(u_p, q_p) -
      DenseMatrix(q_p.cast<Complex>().asDiagonal()) - t_plus_raw));
  split.qpm_equality_residual = std::max(eq_m, eq_p);
  if (path.locality == LocalityClass::StrictlyLocal &&
      split.qpm_equality_residual > opts.thresholds.equality_tol) {
    throw ConsistencyError(
        "transport_operators: strip-charge equality violated for a strictly "
        "local generator (" +
        std::to_string(split.qpm_equality_residual) + ")");
  }

  // calibration on Spec(Q_- + T~_-)
  EigenSystem cal_sys = hermitian_eig(
      DenseMatrix(DenseMatrix(q_m.cast<Complex>().asDiagonal()) + t_minus_raw));
  Calibration cal = calibrate_nu(cal_sys.values);
  split.nu = cal.nu;
  split.calibration_distance = cal.achieved_distance;

  const Eigen::Index n = space->dim();
  split.t_minus = t_minus_raw - cal.nu * DenseMatrix::Identity(n, n);
  split.t_plus = t_plus_raw + cal.nu * DenseMatrix::Identity(n, n);

  split.residual_split = spectral_norm(DenseMatrix(
      conjugated_diagonal(u, q) - q_diag - split.t_minus - split.t_plus));
  split.residual_constraint =
      exp_constraint_residual(DenseMatrix(q_diag + split.t_minus));

  split.support_residual_minus = support_check(*space, split.t_minus, st.minus);
  split.support_residual_plus = support_check(*space, split.t_plus, st.plus);

  const auto& th = opts.thresholds;
  if (split.residual_split > th.residual_split_max) {
    throw AssumptionError("transport_operators: splitting residual " +
                              std::to_string(split.residual_split) +
                              " above threshold",
                          split.residual_split);
  }
  if (split.residual_constraint > th.residual_constraint_max) {
    throw AssumptionError("transport_operators: constraint residual " +
                              std::to_string(split.residual_constraint) +
                              " above threshold",
                          split.residual_constraint);
  }
  if (th.support_residual_max >= 0 &&
      std::max(split.support_residual_minus, split.support_residual_plus) >
          th.support_residual_max) {
    throw AssumptionError("transport_operators: support residual above "
                          "threshold",
                          std::max(split.support_residual_minus,
                                   split.support_residual_plus));
  }
  return split;
}

TransportSplit closed_form_split(std::shared_ptr<const ManyBodySpace> space,
                                 DenseMatrix u, DenseMatrix t_minus_raw,
                                 DenseMatrix t_plus_raw,
                                 const ChargeFamily& family, int axis,
                                 const TransportThresholds& th) {
  const TorusLattice& lat = space->lattice();
  const Region gamma = half_torus(lat, axis);
  const RealVector q = family.region_diagonal(gamma);
  const DenseMatrix q_diag = DenseMatrix(q.cast<Complex>().asDiagonal());

  TransportSplit split;
  split.u = std::move(u);

  Strips st = strips(lat, axis);
  split.strip_minus = st.minus;
  split.strip_plus = st.plus;

  const RealVector q_m =
      family.region_diagonal(region_intersection(gamma, st.minus));
  EigenSystem cal_sys = hermitian_eig(
      DenseMatrix(DenseMatrix(q_m.cast<Complex>().asDiagonal()) + t_minus_raw));
  Calibration cal = calibrate_nu(cal_sys.values);
  split.nu = cal.nu;
  split.calibration_distance = cal.achieved_distance;

  const Eigen::Index n = space->dim();
  split.t_minus = t_minus_raw - cal.nu * DenseMatrix::Identity(n, n);
  split.t_plus = t_plus_raw + cal.nu * DenseMatrix::Identity(n, n);

  split.residual_split = spectral_norm(
      DenseMatrix(conjugated_diagonal(split.u, q) - q_diag - split.t_minus -
                  split.t_plus));
  split.residual_constraint =
      exp_constraint_residual(DenseMatrix(q_diag + split.t_minus));
  split.support_residual_minus = support_check(*space, split.t_minus, st.minus);
  split.support_residual_plus = support_check(*space, split.t_plus, st.plus);

  if (split.residual_split > th.residual_split_max) {
    throw AssumptionError("closed_form_split: splitting residual above "
                          "threshold",
                          split.residual_split);
  }
  if (split.residual_constraint > th.residual_constraint_max) {
    throw AssumptionError("closed_form_split: constraint residual above "
                          "threshold",
                          split.residual_constraint);
  }
  return split;
}

// ---------------------------------------------------------------------------

IndexValue transported_charge(const SpectralData& s,
                              const TransportSplit& split) {
  if (s.degenerate) {
    throw ConditioningError(
        "transported_charge: degenerate ground state, index undefined");
  }
  const Complex val = expectation(s.ground, split.t_minus);
  IndexValue out;
  out.index = std::real(val);
  out.imag_part = std::imag(val);
  if (std::abs(out.imag_part) > 1e-10) {
    throw ValidationError("transported_charge: expectation is not real");
  }
  out.nearest_int = std::lround(out.index);
  out.deviation = std::abs(out.index - static_cast<double>(out.nearest_int));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// applies e^{i phi A} psi through a precomputed eigensystem
struct PhaseApplier {
  EigenSystem sys;
  DenseVector coeffs;  // V^dag psi
  explicit PhaseApplier(const DenseMatrix& a, const DenseVector& psi)
      : sys(hermitian_eig(a)) {
    coeffs = sys.vectors.adjoint() * psi;
  }
  DenseVector at(double phi) const {
    DenseVector scaled(coeffs.size());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
      scaled(i) = std::exp(Complex(0, phi * sys.values(i))) * coeffs(i);
    }
    return sys.vectors * scaled;
  }
};

}  // namespace

ChiDiagnostic interference_phase(const SpectralData& s, const Dressing& d,
                                 const TransportSplit& split,
                                 const ChargeFamily& family, int axis,
                                 double index_for_comparison,
                                 const ChiOptions& opts) {
  const ManyBodySpace& space = *s.space;
  const TorusLattice& lat = space.lattice();
  const Region gamma = half_torus(lat, axis);
  Strips st = strips(lat, axis);
  const RealVector q_m =
      family.region_diagonal(region_intersection(gamma, st.minus));
  const RealVector q_full = family.region_diagonal(gamma);

  const DenseMatrix& u = split.u;
  const DenseMatrix ku_minus = localize_to_region(
      space, DenseMatrix(u.adjoint() * d.k_minus_local * u), st.minus);

  const DenseMatrix qbar_minus =
      DenseMatrix(q_m.cast<Complex>().asDiagonal()) - d.k_minus_local;
  const DenseMatrix qbaru_minus =
      DenseMatrix(q_m.cast<Complex>().asDiagonal()) + split.t_minus - ku_minus;
  const DenseMatrix qbar = DenseMatrix(q_full.cast<Complex>().asDiagonal()) -
                           d.k_minus_local - d.k_plus_local;

  const DenseVector& psi = s.ground;
  PhaseApplier ap_minus(qbar_minus, psi);
  PhaseApplier ap_u_minus(qbaru_minus, psi);
  PhaseApplier ap_bar(qbar, psi);
  const DenseVector u_psi = u * psi;
  PhaseApplier ap_bar_on_upsi(qbar, u_psi);

  ChiDiagnostic diag;
  const int npts = opts.grid_points;
  std::vector<double> raw_args;
  for (int k = 0; k <= npts; ++k) {
    const double phi = 2.0 * M_PI * k / npts;
    // chi(phi) = < e^{-i phi QbarU_-} psi , e^{-i phi Qbar_-} psi >
    const DenseVector a = ap_minus.at(-phi);
    const DenseVector b = ap_u_minus.at(-phi);
    const Complex chi = b.dot(a);
    // Z(phi) = U* e^{i phi Qbar} U e^{-i phi Qbar}
    const DenseVector w = ap_bar.at(-phi);
    const DenseVector y = ap_bar_on_upsi.at(-phi);
    const Complex z = y.dot(DenseVector(u * w));

    diag.phi.push_back(phi);
    diag.chi.push_back(chi);
    diag.z_full.push_back(z);
    raw_args.push_back(std::arg(chi));

    const double mod_dev = std::abs(1.0 - std::abs(chi));
    if (mod_dev > diag.max_modulus_deviation) {
      diag.max_modulus_deviation = mod_dev;
      diag.worst_phi = phi;
    }
    diag.max_z_deviation =
        std::max(diag.max_z_deviation, std::abs(z - Complex(1.0, 0.0)));
  }
  if (diag.max_modulus_deviation > opts.modulus_fail) {
    throw DiagnosticError(
        "interference_phase: |chi| far from 1 at phi=" +
        std::to_string(diag.worst_phi) + " (deviation " +
        std::to_string(diag.max_modulus_deviation) + ")");
  }

  const std::vector<double> args = unwrap_phases(raw_args);
  double sxx = 0.0, sxy = 0.0;
  for (size_t k = 0; k < args.size(); ++k) {
    sxx += diag.phi[k] * diag.phi[k];
    sxy += diag.phi[k] * args[k];
  }
  diag.slope = sxy / sxx;
  for (size_t k = 0; k < args.size(); ++k) {
    diag.max_phase_deviation =
        std::max(diag.max_phase_deviation,
                 std::abs(args[k] - diag.phi[k] * index_for_comparison));
  }
  diag.chi_end_deviation = std::abs(diag.chi.back() - Complex(1.0, 0.0));
  return diag;
}

// ---------------------------------------------------------------------------

double hall_curvature(const DenseVector& ground, const DenseMatrix& k1_minus,
                      const DenseMatrix& k2_minus, double imag_tol) {
  const Complex val =
      Complex(0, 1) *
      ground.dot(DenseVector(k1_minus * (k2_minus * ground) -
                             k2_minus * (k1_minus * ground)));
  if (std::abs(std::imag(val)) > imag_tol) {
    throw ValidationError("hall_curvature: nonreal curvature");
  }
  return std::real(val);
}

FluxUnitary flux_unitary(const SpectralData& s, const LocalHamiltonian& ham,
                         const ChargeFamily& family, int axis,
                         const FluxOptions& opts) {
  if (!s.eig) {
    throw ConditioningError("flux_unitary: full eigendecomposition required");
  }
  auto space = s.space;
  const TorusLattice& lat = space->lattice();
  const double gap_floor = std::max(s.gap, 1e-6);
  Strips st = strips(lat, axis);
  const Region gamma = half_torus(lat, axis);
  const Region gamma_minus = region_intersection(gamma, st.minus);

  // current pieces near the lower boundary, keyed by their source terms
  BoundaryCurrents bc = boundary_currents(*space, ham, family, axis);
  struct Piece {
    Region support;
    SparseMatrix j;
  };
  auto pieces = std::make_shared<std::vector<Piece>>();
  {
    const RealVector q = family.region_diagonal(gamma);
    auto [bm, bp] = boundaries(lat, axis);
    const int r = std::max(1, ham.range);
    const Region fat_m = fatten(lat, bm, r);
    for (const auto& term : ham.terms) {
      SparseMatrix m = materialize(*space, term);
      std::vector<Eigen::Triplet<Complex>> local;
      double comm_norm = 0.0;
      for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
          const Complex val =
              Complex(0, 1) * it.value() * (q(it.col()) - q(it.row()));
          if (std::abs(val) > 1e-15) {
            local.emplace_back(it.row(), it.col(), val);
            comm_norm = std::max(comm_norm, std::abs(val));
          }
        }
      }
      if (comm_norm <= 1e-14) continue;
      if (!term.support.is_subset_of(fat_m)) continue;  // the + boundary
      Piece p;
      p.support = term.support;
      p.j.resize(space->dim(), space->dim());
      p.j.setFromTriplets(local.begin(), local.end());
      pieces->push_back(std::move(p));
    }
  }

  // K_- localized to the strip; the generator of one flux quantum
  const DenseMatrix k_exact =
      -quasi_adiabatic_map(*s.eig, DenseMatrix(bc.j_minus), gap_floor);
  const DenseMatrix k_loc = localize_to_region(*space, k_exact, st.minus);
  const RealVector q_minus_diag = family.region_diagonal(gamma_minus);

  FluxUnitary out;
  out.u = hermitian_exp(
      DenseMatrix(DenseMatrix(q_minus_diag.cast<Complex>().asDiagonal()) -
                  k_loc),
      Complex(0, -2.0 * M_PI));
  {
    const RealVector q_full = family.region_diagonal(gamma);
    const DenseMatrix u2 = hermitian_exp(
        DenseMatrix(DenseMatrix(q_full.cast<Complex>().asDiagonal()) - k_loc),
        Complex(0, -2.0 * M_PI));
    out.two_form_residual = spectral_norm(DenseMatrix(out.u - u2));
  }
  if (out.two_form_residual > opts.equality_tol) {
    throw ValidationError(
        "flux_unitary: the two generator forms disagree (residual " +
        std::to_string(out.two_form_residual) + ")");
  }
  out.var = unitary_variance(s.ground, out.u);
  if (opts.variance_max >= 0 && out.var.variance > opts.variance_max) {
    throw AssumptionError("flux_unitary: ground state is not an approximate "
                          "eigenvector of the flux unitary",
                          out.var.variance);
  }

  // constant generator path with per-term support, for transport splits
  auto eig = std::make_shared<EigenSystem>(*s.eig);
  auto fam = std::make_shared<ChargeFamily>(family);
  const Region strip_minus = st.minus;
  out.path.constant = true;
  out.path.locality = LocalityClass::QuasiLocal;
  out.path.summed = [space, pieces, eig, fam, gamma_minus, strip_minus,
                     gap_floor](
                        double, const std::optional<Region>& restriction) {
    const std::int64_t n = space->dim();
    RealVector qsel = RealVector::Zero(n);
    for (int site : gamma_minus.sites()) {
      if (!restriction || restriction->contains(site)) {
        qsel += fam->site_diagonal(site);
      }
    }
    SparseMatrix jsel(n, n);
    bool any = false;
    for (const auto& p : *pieces) {
      if (!restriction || p.support.is_subset_of(*restriction)) {
        jsel = any ? SparseMatrix(jsel + p.j) : p.j;
        any = true;
      }
    }
    DenseMatrix g = DenseMatrix(qsel.cast<Complex>().asDiagonal());
    if (any) {
      const DenseMatrix ksel = localize_to_region(
          *space, -quasi_adiabatic_map(*eig, DenseMatrix(jsel), gap_floor),
          strip_minus);
      g -= ksel;
    }
    return DenseMatrix(2.0 * M_PI * g);
  };
  return out;
}

}  // namespace fluxlab
