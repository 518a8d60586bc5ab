#pragma once

#include "fluxlab/operators.hpp"

namespace fluxlab {

/// One-particle objects on l2 of the lattice (single orbital per site).
struct OneParticleModel {
  TorusLattice lattice{1, 4};
  DenseMatrix h;
  double mu = 0.0;
  DenseMatrix u;
};

/// Spectral projector 1(h <= mu); fails when an eigenvalue sits within
/// gap_floor of mu.
DenseMatrix fermi_projection(const DenseMatrix& h, double mu,
                             double gap_floor = 1e-8);

struct OneParticleTransport {
  DenseMatrix t;          // u* q u - q
  DenseMatrix t_minus;    // 1_{S-} t 1_{S-}
  DenseMatrix t_plus;
  double strip_residual = 0.0;  // ||t - t_- - t_+||
};

OneParticleTransport one_particle_transport(const TorusLattice& lat,
                                            const DenseMatrix& u, int axis);

struct FreeFermionIndex {
  double value = 0.0;
  long nearest_int = 0;
  double deviation = 0.0;
  double pu_commutator = 0.0;  // ||[p,u]||, recorded
};

/// tr(p (u* q u - q)_{S-})
FreeFermionIndex ff_index(const TorusLattice& lat, const DenseMatrix& p,
                          const DenseMatrix& u, int axis);

struct PqpGapReport {
  RealVector spectrum;  // of pqp restricted to range(p)
  bool gap_found = false;
  double gap_lo = 0.0, gap_hi = 0.0;
  double projection_residual = 0.0;  // ||chi(pqp)^2 - chi(pqp)||
  double chi_index = 0.0;            // tr((u* chi u - chi)_{S-})
  double plain_index = 0.0;          // tr(p t_{S-})
};

struct PqpOptions {
  double window_lo = 0.1;
  double window_hi = 0.9;
  double min_gap_width = 0.05;
};

/// Spectrum of pqp on range(p); locates an eigenvalue-free interval in the
/// window, builds the mollified step through it and checks the projection
/// and index identities. gap_found stays false for gapless h.
PqpGapReport pqp_gap_check(const TorusLattice& lat, const DenseMatrix& p,
                           const DenseMatrix& u, int axis,
                           const PqpOptions& opts = {});

// one-particle builders ------------------------------------------------------

/// (u psi)(x) = psi(x - m): index +m when fully filled
DenseMatrix shift_unitary(const TorusLattice& lat, int m, int axis = 1);
DenseMatrix uniform_chain_h(const TorusLattice& lat, double t);
/// alternating hoppings t1 (even bond) / t2 (odd bond)
DenseMatrix ssh_chain_h(const TorusLattice& lat, double t1, double t2);
/// Landau-gauge hopping model with flux 2*pi*p/q per plaquette, with
/// optional boundary twists (theta1, theta2).
DenseMatrix hofstadter_h(const TorusLattice& lat, int flux_num, int flux_den,
                         double tx, double ty, double theta1 = 0.0,
                         double theta2 = 0.0);

/// Berry-curvature lattice sum over twist angles for the lowest `filled`
/// bands; exactly integer for a gapped spectrum.
int chern_number(const std::function<DenseMatrix(double, double)>& h_of_twists,
                 int filled, int grid = 8);

// many-body bridge ------------------------------------------------------------

/// Hopping + on-site terms realizing dGamma(h - mu).
ModelSystem one_particle_to_model(const TorusLattice& lat, const DenseMatrix& h,
                                  double mu);

/// Sum_{xy} m_xy c^dag_x c_y on the given space.
SparseMatrix second_quantized_one_body(const ManyBodySpace& space,
                                       const DenseMatrix& m);

/// Gamma(u) for u = permutation * diagonal phases: u_{perm[x], x} = phase[x].
DenseMatrix second_quantized_permutation(const ManyBodySpace& space,
                                         const std::vector<int>& perm,
                                         const std::vector<Complex>& phases);

}  // namespace fluxlab
