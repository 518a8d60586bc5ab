#pragma once

#include "fluxlab/freefermion.hpp"
#include "fluxlab/transport.hpp"

namespace fluxlab {

// spin chains (spin-1/2, charge Q_x = S^z_x + 1/2) ---------------------------

/// XX chain with a uniform field; for field > 2*coupling the ground state is
/// the fully polarized product state.
ModelSystem xx_chain_model(int length, double coupling, double field);
ModelSystem heisenberg_chain_model(int length, double coupling);

// fermion chains (single orbital, unit charge) -------------------------------

/// -(t + (-1)^x dimer) hoppings with phase flux/L per bond, staggered
/// potential and chemical potential.
ModelSystem fermion_chain_model(int length, double hopping, double dimer,
                                double stagger, double mu, double total_flux);

/// Landau-gauge flux model at flux p/q per plaquette with the chemical
/// potential centered in the gap above the lowest `filled` one-particle
/// levels; optional nearest-neighbour interaction.
ModelSystem flux_lattice_model(int length, int flux_num, int flux_den,
                               double tx, double ty, int filled,
                               double interaction);
double flux_lattice_mu(int length, int flux_num, int flux_den, double tx,
                       double ty, int filled);

/// Decoupled dimerized chains along axis 1 (a trivial stacked insulator).
ModelSystem stacked_chains_model(int length, double t1, double t2);

// translation systems --------------------------------------------------------

/// Unitary with U* n_x U = n_{x+1} along `axis`: a configuration permutation
/// for spins, the parity-corrected mode permutation for fermions.
DenseMatrix translation_unitary(const ManyBodySpace& space, int axis = 1);

double translation_invariance_residual(const ManyBodySpace& space,
                                       const SparseMatrix& h,
                                       const DenseMatrix& translation);

/// The natural translation split (T-, T+) = (-Q_{[0]}, +Q_{[L/2]}).
std::pair<DenseMatrix, DenseMatrix> translation_split(
    const ChargeFamily& family, int axis = 1);

// pump cycles ----------------------------------------------------------------

struct PumpCycle {
  double hopping = 1.0;
  double dimer_amp = 0.6;
  double stagger_amp = 1.2;
  double dimer_center = 0.0;  // shifts the cycle; at dimer_amp it touches the
                              // degeneracy point
  double scale = 1.0;         // overall amplitude of the loop
  bool reverse = false;
};

double pump_dimer(const PumpCycle& c, double s);
double pump_stagger(const PumpCycle& c, double s);
std::vector<LocalTerm> rice_mele_terms(const TorusLattice& lat, double hopping,
                                       double dimer, double stagger);

ModelSystem rice_mele_model(int length, const PumpCycle& c, double s);

/// Quasi-local generator family: the spectral-flow image of dH/ds at each s,
/// with term supports inherited from the Hamiltonian terms. Raises a
/// conditioning error if the in-sector gap closes along the path.
GeneratorPath pump_generator_path(std::shared_ptr<const ManyBodySpace> space,
                                  const PumpCycle& c,
                                  double gap_floor_min = 1e-6);

/// Constant generator time*H with per-term restriction (the propagator
/// e^{-i time H} as a transport unitary).
GeneratorPath propagator_path(std::shared_ptr<const ManyBodySpace> space,
                              const std::vector<LocalTerm>& terms,
                              double time);

}  // namespace fluxlab
