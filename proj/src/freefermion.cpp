#include "fluxlab/freefermion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fluxlab {

namespace {

RealVector half_torus_indicator(const TorusLattice& lat, int axis) {
  const Region gamma = half_torus(lat, axis);
  RealVector q = RealVector::Zero(lat.size());
  for (int s : gamma.sites()) q(s) = 1.0;
  return q;
}

RealVector strip_indicator(const TorusLattice& lat, const Region& r) {
  RealVector v = RealVector::Zero(lat.size());
  for (int s : r.sites()) v(s) = 1.0;
  return v;
}

}  // namespace

DenseMatrix fermi_projection(const DenseMatrix& h, double mu,
                             double gap_floor) {
  EigenSystem sys = hermitian_eig(h);
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    if (std::abs(sys.values(i) - mu) < gap_floor) {
      throw ConditioningError(
          "fermi_projection: eigenvalue at the chemical potential");
    }
  }
  DenseVector occ(sys.values.size());
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    occ(i) = sys.values(i) <= mu ? 1.0 : 0.0;
  }
  return sys.vectors * occ.asDiagonal() * sys.vectors.adjoint();
}

OneParticleTransport one_particle_transport(const TorusLattice& lat,
                                            const DenseMatrix& u, int axis) {
  const RealVector q = half_torus_indicator(lat, axis);
  OneParticleTransport out;
  out.t = u.adjoint() * q.cast<Complex>().asDiagonal() * u;
  out.t -= DenseMatrix(q.cast<Complex>().asDiagonal());
  Strips st = strips(lat, axis);
  const RealVector sm = strip_indicator(lat, st.minus);
  const RealVector sp = strip_indicator(lat, st.plus);
  out.t_minus = sm.cast<Complex>().asDiagonal() * out.t *
                sm.cast<Complex>().asDiagonal();
  out.t_plus = sp.cast<Complex>().asDiagonal() * out.t *
               sp.cast<Complex>().asDiagonal();
  out.strip_residual =
      spectral_norm(DenseMatrix(out.t - out.t_minus - out.t_plus));
  return out;
}

FreeFermionIndex ff_index(const TorusLattice& lat, const DenseMatrix& p,
                          const DenseMatrix& u, int axis) {
  OneParticleTransport tr = one_particle_transport(lat, u, axis);
  FreeFermionIndex out;
  out.value = std::real((p * tr.t_minus).trace());
  out.nearest_int = std::lround(out.value);
  out.deviation = std::abs(out.value - static_cast<double>(out.nearest_int));
  out.pu_commutator = spectral_norm(DenseMatrix(p * u - u * p));
  return out;
}

namespace {

// C-infinity step: 0 below 0, 1 above 1
double mollified_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

}  // namespace

PqpGapReport pqp_gap_check(const TorusLattice& lat, const DenseMatrix& p,
                           const DenseMatrix& u, int axis,
                           const PqpOptions& opts) {
  const RealVector q = half_torus_indicator(lat, axis);
  const DenseMatrix pqp =
      p * DenseMatrix(q.cast<Complex>().asDiagonal()) * p;
  EigenSystem full = hermitian_eig(pqp);

  // spectrum restricted to range(p): drop the kernel of p
  EigenSystem psys = hermitian_eig(p);
  int rank = 0;
  for (Eigen::Index i = 0; i < psys.values.size(); ++i) {
    if (psys.values(i) > 0.5) ++rank;
  }
  const DenseMatrix pbasis = psys.vectors.rightCols(rank);
  const DenseMatrix restricted =
      pbasis.adjoint() *
      DenseMatrix(q.cast<Complex>().asDiagonal()) * pbasis;
  EigenSystem rsys = hermitian_eig(restricted);

  PqpGapReport rep;
  rep.spectrum = rsys.values;

  // largest eigenvalue-free interval intersected with the window
  double best_width = 0.0;
  double lo = 0.0, hi = 0.0;
  std::vector<double> pts(rsys.values.data(),
                          rsys.values.data() + rsys.values.size());
  pts.insert(pts.begin(), 0.0);
  pts.push_back(1.0);
  std::sort(pts.begin(), pts.end());
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = std::max(pts[i], opts.window_lo);
    const double b = std::min(pts[i + 1], opts.window_hi);
    if (b - a > best_width) {
      best_width = b - a;
      lo = a;
      hi = b;
    }
  }
  rep.gap_found = best_width >= opts.min_gap_width;
  rep.gap_lo = lo;
  rep.gap_hi = hi;
  if (!rep.gap_found) return rep;

  // chi(pqp) through the gap, on the full one-particle space
  DenseVector chi_vals(full.values.size());
  for (Eigen::Index i = 0; i < full.values.size(); ++i) {
    chi_vals(i) = mollified_step((full.values(i) - lo) / (hi - lo));
  }
  const DenseMatrix chi_op =
      full.vectors * chi_vals.asDiagonal() * full.vectors.adjoint();
  rep.projection_residual = spectral_norm(DenseMatrix(chi_op * chi_op - chi_op));

  Strips st = strips(lat, axis);
  const DenseMatrix diff = u.adjoint() * chi_op * u - chi_op;
  Complex tr_s = 0.0;
  for (int s : st.minus.sites()) tr_s += diff(s, s);
  rep.chi_index = std::real(tr_s);
  rep.plain_index = ff_index(lat, p, u, axis).value;
  return rep;
}

// ---------------------------------------------------------------------------

DenseMatrix shift_unitary(const TorusLattice& lat, int m, int axis) {
  const int n = lat.size();
  DenseMatrix u = DenseMatrix::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    std::vector<int> coords(lat.dimension());
    for (int a = 1; a <= lat.dimension(); ++a) coords[a - 1] = lat.coordinate(s, a);
    coords[axis - 1] += m;
    u(lat.site_at(coords), s) = 1.0;  // (u psi)(x) = psi(x - m)
  }
  return u;
}

DenseMatrix uniform_chain_h(const TorusLattice& lat, double t) {
  const int n = lat.size();
  DenseMatrix h = DenseMatrix::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    const int nxt = lat.site_at({lat.coordinate(s, 1) + 1});
    h(s, nxt) += -t;
    h(nxt, s) += -t;
  }
  return h;
}

DenseMatrix ssh_chain_h(const TorusLattice& lat, double t1, double t2) {
  const int n = lat.size();
  DenseMatrix h = DenseMatrix::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    const int x = lat.coordinate(s, 1);
    const int nxt = lat.site_at({x + 1});
    const double t = (((x % 2) + 2) % 2 == 0) ? t1 : t2;
    h(s, nxt) += -t;
    h(nxt, s) += -t;
  }
  return h;
}

DenseMatrix hofstadter_h(const TorusLattice& lat, int flux_num, int flux_den,
                         double tx, double ty, double theta1, double theta2) {
  if (lat.dimension() != 2) throw ParameterError("hofstadter_h: needs d=2");
  if (lat.side() % flux_den != 0) {
    throw ParameterError("hofstadter_h: flux denominator must divide L");
  }
  const int n = lat.size();
  const int L = lat.side();
  const double alpha = static_cast<double>(flux_num) / flux_den;
  DenseMatrix h = DenseMatrix::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    const int x = lat.coordinate(s, 1);
    const int y = lat.coordinate(s, 2);
    // x-hop, with the twist on the wrapping bond
    {
      const int to = lat.site_at({x + 1, y});
      Complex amp = -tx;
      if (x + 1 > L / 2) amp *= std::exp(Complex(0, theta1));
      h(to, s) += amp;
      h(s, to) += std::conj(amp);
    }
    // y-hop with Landau phase
    {
      const int to = lat.site_at({x, y + 1});
      Complex amp = -ty * std::exp(Complex(0, 2.0 * M_PI * alpha * x));
      if (y + 1 > L / 2) amp *= std::exp(Complex(0, theta2));
      h(to, s) += amp;
      h(s, to) += std::conj(amp);
    }
  }
  return h;
}

int chern_number(const std::function<DenseMatrix(double, double)>& h_of_twists,
                 int filled, int grid) {
  // lattice field-strength sum over the twist torus
  std::vector<std::vector<DenseMatrix>> frames(grid,
                                               std::vector<DenseMatrix>(grid));
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      const double t1 = 2.0 * M_PI * a / grid;
      const double t2 = 2.0 * M_PI * b / grid;
      EigenSystem sys = hermitian_eig(h_of_twists(t1, t2));
      frames[a][b] = sys.vectors.leftCols(filled);
    }
  }
  auto link = [&](int a, int b, int da, int db) {
    const auto& f0 = frames[a][b];
    const auto& f1 = frames[(a + da) % grid][(b + db) % grid];
    return DenseMatrix(f0.adjoint() * f1).determinant();
  };
  double total = 0.0;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      const Complex u1 = link(a, b, 1, 0);
      const Complex u2 = link(a, b, 0, 1);
      const Complex u1b = link(a, (b + 1) % grid, 1, 0);
      const Complex u2b = link((a + 1) % grid, b, 0, 1);
      total += std::arg(u1 * u2b / (u1b * u2));
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

// ---------------------------------------------------------------------------

ModelSystem one_particle_to_model(const TorusLattice& lat, const DenseMatrix& h,
                                  double mu) {
  ModelSystem model;
  model.spec.kind = ParticleKind::Fermion;
  model.spec.local_dim = 1;
  model.spec.lattice = lat;
  model.spec.charge_per_level = {1};
  const int n = lat.size();
  for (int x = 0; x < n; ++x) {
    const double diag = std::real(h(x, x)) - mu;
    if (std::abs(diag) > 1e-15) {
      model.terms.push_back(number_term("onsite_" + std::to_string(x), x, diag));
    }
    for (int y = x + 1; y < n; ++y) {
      if (std::abs(h(x, y)) > 1e-15) {
        model.terms.push_back(hopping_term(
            "hop_" + std::to_string(x) + "_" + std::to_string(y), x, y,
            h(x, y)));
      }
    }
  }
  return model;
}

SparseMatrix second_quantized_one_body(const ManyBodySpace& space,
                                       const DenseMatrix& m) {
  std::vector<LocalTerm> terms;
  const int n = static_cast<int>(m.rows());
  for (int x = 0; x < n; ++x) {
    if (std::abs(m(x, x)) > 1e-16) {
      terms.push_back(number_term("n", x, std::real(m(x, x))));
    }
    for (int y = x + 1; y < n; ++y) {
      if (std::abs(m(x, y)) > 1e-16) {
        terms.push_back(hopping_term("hop", x, y, m(x, y)));
      }
    }
  }
  return materialize_sum(space, terms);
}

DenseMatrix second_quantized_permutation(const ManyBodySpace& space,
                                         const std::vector<int>& perm,
                                         const std::vector<Complex>& phases) {
  if (space.spec().kind != ParticleKind::Fermion || space.spec().local_dim != 1) {
    throw ParameterError(
        "second_quantized_permutation: single-orbital fermion space expected");
  }
  const std::int64_t dim = space.dim();
  const int n = space.lattice().size();
  DenseMatrix u = DenseMatrix::Zero(dim, dim);
  std::vector<int> modes, mapped;
  for (std::int64_t col = 0; col < dim; ++col) {
    const std::uint64_t c = space.config(col);
    modes.clear();
    for (int x = 0; x < n; ++x) {
      if ((c >> x) & 1u) modes.push_back(x);
    }
    mapped.clear();
    Complex phase = 1.0;
    for (int x : modes) {
      mapped.push_back(perm[x]);
      phase *= phases[x];
    }
    // parity of the permutation sorting the image modes
    int sign = 1;
    std::vector<int> sorted = mapped;
    for (size_t i = 0; i < sorted.size(); ++i) {
      for (size_t j = i + 1; j < sorted.size(); ++j) {
        if (sorted[i] > sorted[j]) {
          std::swap(sorted[i], sorted[j]);
          sign = -sign;
        }
      }
    }
    std::uint64_t target = 0;
    for (int x : sorted) target |= (1ull << x);
    auto idx = space.index_of(target);
    if (!idx) {
      throw ValidationError("second_quantized_permutation: left the sector");
    }
    u(*idx, col) = phase * static_cast<double>(sign);
  }
  return u;
}

}  // namespace fluxlab
