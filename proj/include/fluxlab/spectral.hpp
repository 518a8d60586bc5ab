#pragma once

#include <functional>
#include <optional>

#include "fluxlab/operators.hpp"

namespace fluxlab {

struct SectorScanEntry {
  int charge = 0;
  std::int64_t dim = 0;
  double e0 = 0.0;
  double e1 = 0.0;  // NaN when the sector has dimension 1
};

/// Ground data of a charge-conserving Hamiltonian. The ground vector lives
/// in its total-charge sector; the gap is global (scanned over all sectors).
/// Eigenvalues in `eig` are shifted so the ground energy is 0.
struct SpectralData {
  std::shared_ptr<const ManyBodySpace> space;
  SparseMatrix hamiltonian;  // restricted to `space`, unshifted
  DenseVector ground;
  double ground_energy = 0.0;
  double gap = 0.0;
  bool degenerate = false;
  std::optional<EigenSystem> eig;
  std::vector<SectorScanEntry> scan;
};

struct GroundStateOptions {
  int dense_threshold = 3000;      // dense eig below, Lanczos above
  double degeneracy_tol = 1e-8;
  bool want_full_eig = true;       // full eig of the ground sector
  std::int64_t full_eig_cap = 1 << 14;
  std::int64_t dimension_cap = 1 << 22;
};

SpectralData ground_state(const ModelSystem& model,
                          const GroundStateOptions& opts = {});

/// Variance of a unitary coincides with 1 - |<psi,U psi>|^2; returns both.
struct UnitaryVariance {
  double variance = 0.0;
  double one_minus_overlap_sq = 0.0;
};
UnitaryVariance unitary_variance(const DenseVector& psi, const DenseMatrix& u);

// ---------------------------------------------------------------------------
// Clustering

struct ClusteringOptions {
  double c_min = 0.2;
  double max_rms_log_residual = 1.0;
  double noise_floor = 1e-12;
  int min_separations = 3;
};

struct ClusteringFit {
  std::vector<std::pair<int, double>> samples;  // (d1 separation, |corr|)
  double amplitude = 0.0;                       // fitted prefactor
  double rate = 0.0;                            // fitted decay rate c
  double rms_log_residual = 0.0;
  bool all_below_floor = false;
  bool pass = false;
};

/// Connected correlators of density and bond probes along `axis`,
/// exponential fit on the log scale over separations >= 2.
ClusteringFit clustering_fit(const SpectralData& s, const ChargeFamily& family,
                             int axis, const ClusteringOptions& opts = {});

// ---------------------------------------------------------------------------
// Spectral flow map

/// Energy-basis filter map: matrix elements are multiplied by an odd
/// imaginary weight equal to i/(E_m - E_n) whenever |E_m - E_n| >= gap_floor
/// and tapered linearly to 0 below it (near-degenerate pairs among excited
/// states are not contractually constrained; the taper keeps the output
/// norm bounded). With K := i I([Q,H]) the ground-state projector satisfies
/// [Q - K, P] = 0 exactly.
DenseMatrix quasi_adiabatic_map(const EigenSystem& shifted_eig,
                                const DenseMatrix& a, double gap_floor);

/// Time-domain cross-check of the same map: quadrature of
/// W(t) e^{itH} A e^{-itH} with the odd kernel W(t) = sign(t) erfc(s|t|/sqrt2)/2,
/// whose transform matches i/w up to a Gaussian cutoff of width s.
DenseMatrix quasi_adiabatic_map_time_domain(const EigenSystem& shifted_eig,
                                            const DenseMatrix& a,
                                            double kernel_width,
                                            int quadrature_points = 4000,
                                            double t_max_sigmas = 10.0);

// ---------------------------------------------------------------------------
// Boundary currents and dressing operators

struct BoundaryCurrents {
  SparseMatrix j_minus, j_plus;  // i[H,Q] = J- + J+
  Region support_minus, support_plus;
};

/// Splits i[H,Q] by term attribution to the two boundary strips of the half
/// torus. A commuting term contributes nothing; a non-commuting term whose
/// support lies in neither fattened boundary raises a consistency error.
BoundaryCurrents boundary_currents(const ManyBodySpace& space,
                                   const LocalHamiltonian& ham,
                                   const ChargeFamily& family, int axis);

struct DressingOptions {
  double gap_floor_min = 1e-6;
  int locality_max_distance = -1;  // default L/4
};

struct Dressing {
  DenseMatrix k_minus, k_plus;              // exact eigenbasis construction
  DenseMatrix k_minus_local, k_plus_local;  // localized to the strips
  double var_qbar = 0.0;        // Var(Q - K- - K+), exact construction
  double var_qbar_local = 0.0;  // same with localized approximants
  double norm_per_volume_minus = 0.0, norm_per_volume_plus = 0.0;
  double local_error_minus = 0.0, local_error_plus = 0.0;
  std::vector<std::pair<int, double>> locality_minus, locality_plus;
  Region strip_minus, strip_plus;
};

Dressing dressing_operators(const SpectralData& s, const LocalHamiltonian& ham,
                            const ChargeFamily& family, int axis,
                            const DressingOptions& opts = {});

// ---------------------------------------------------------------------------
// Almost-locality of a unitary

struct AlmostLocalProfile {
  Region probe_support;
  std::vector<double> residual_per_radius;  // ||U*AU - R_n|| / (||A|| |X|)
};

std::vector<AlmostLocalProfile> almost_local_check(
    const ManyBodySpace& space, const DenseMatrix& u,
    const std::vector<LocalTerm>& probes, int max_radius);

/// <ground, J_- ground>; the stationary current across the lower boundary.
double ground_state_current(const SpectralData& s, const LocalHamiltonian& ham,
                            const ChargeFamily& family, int axis);

}  // namespace fluxlab
