#pragma once

#include "fluxlab/spectral.hpp"

namespace fluxlab {

struct AssumptionError : std::runtime_error {
  AssumptionError(const std::string& what, double measured_value)
      : std::runtime_error(what), measured(measured_value) {}
  double measured;
};
struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DiagnosticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LocalityClass { StrictlyLocal, QuasiLocal };

/// Family of generators s -> G(s) on [0,1], i dU/ds = G(s) U(s). The summed
/// callback returns the sum of generator terms whose nominal support lies
/// inside the restriction (all terms when nullopt). Builders may cache
/// spectral data per s; a path is used by one evolution at a time.
struct GeneratorPath {
  std::function<DenseMatrix(double s, const std::optional<Region>&)> summed;
  LocalityClass locality = LocalityClass::StrictlyLocal;
  bool constant = false;
};

struct EvolveOptions {
  double target_error = 1e-9;
  int base_steps = 16;
  int max_steps = 16384;
  double unitarity_tol = 1e-10;
};

struct EvolveResult {
  DenseMatrix u;
  int steps = 0;
  double error_estimate = 0.0;
};

/// Time-1 solution by the 4th-order commutator-free scheme (two Gauss-node
/// exponentials per step), with step doubling until the difference of
/// successive refinements is below the target. Restriction keeps only the
/// generator terms supported in the given region.
EvolveResult evolve_generator(const GeneratorPath& path,
                              const std::optional<Region>& restriction,
                              const EvolveOptions& opts = {});

/// Same, sharing generator evaluations across several restrictions.
std::vector<EvolveResult> evolve_generator_multi(
    const GeneratorPath& path,
    const std::vector<std::optional<Region>>& restrictions,
    const EvolveOptions& opts = {});

// ---------------------------------------------------------------------------

struct Calibration {
  double nu = 0.0;
  double achieved_distance = 0.0;
};

/// Shift nu in [0,1) minimizing the max distance of spectrum - nu to Z;
/// fails if no shift brings the spectrum within 0.25 of the integers.
Calibration calibrate_nu(const RealVector& spectrum,
                         double fail_threshold = 0.25);

struct TransportThresholds {
  double residual_split_max = 1e-6;
  double residual_constraint_max = 1e-4;
  double support_residual_max = -1.0;  // < 0: report only
  double equality_tol = 1e-10;         // strict locality only
};

struct TransportSplit {
  DenseMatrix u;                 // full unitary
  DenseMatrix t_minus, t_plus;   // calibrated transport operators
  double nu = 0.0;
  double calibration_distance = 0.0;
  double residual_split = 0.0;       // ||U*QU - Q - T- - T+||
  double residual_constraint = 0.0;  // ||e^{2pi i (Q+T-)} - 1||
  double support_residual_minus = 0.0, support_residual_plus = 0.0;
  double qpm_equality_residual = 0.0;  // vs the strip-charge form
  Region strip_minus, strip_plus;
  Region restriction_minus, restriction_plus;
  int evolve_steps = 0;
  double evolve_error = 0.0;
};

struct TransportOptions {
  TransportThresholds thresholds;
  EvolveOptions evolve;
  /// radius of the boundary restriction defining U+-; default ceil(L/12)
  int restriction_radius = -1;
};

/// Builds U and the boundary-restricted U+- from the path, sets
/// T+- = U+-* Q U+- - Q, calibrates nu, and fills all residuals.
TransportSplit transport_operators(std::shared_ptr<const ManyBodySpace> space,
                                   const GeneratorPath& path,
                                   const ChargeFamily& family, int axis,
                                   const TransportOptions& opts = {});

/// Residual bookkeeping for splits given in closed form (translation
/// systems, second-quantized one-particle splits).
TransportSplit closed_form_split(std::shared_ptr<const ManyBodySpace> space,
                                 DenseMatrix u, DenseMatrix t_minus_raw,
                                 DenseMatrix t_plus_raw,
                                 const ChargeFamily& family, int axis,
                                 const TransportThresholds& thresholds = {});

// ---------------------------------------------------------------------------

struct IndexValue {
  double index = 0.0;
  long nearest_int = 0;
  double deviation = 0.0;
  double imag_part = 0.0;
};

/// <ground, T- ground>; refuses degenerate ground states.
IndexValue transported_charge(const SpectralData& s,
                              const TransportSplit& split);

// ---------------------------------------------------------------------------

struct ChiDiagnostic {
  std::vector<double> phi;
  std::vector<Complex> chi;     // eigenvalue samples of the lower loop
  std::vector<Complex> z_full;  // <Z(phi)>, expected ~ 1
  double slope = 0.0;
  double max_phase_deviation = 0.0;  // vs phi * index, unwrapped
  double chi_end_deviation = 0.0;    // |chi(2pi) - 1|
  double max_z_deviation = 0.0;
  double max_modulus_deviation = 0.0;  // max |1 - |chi||
  double worst_phi = 0.0;
};

struct ChiOptions {
  int grid_points = 32;
  double modulus_fail = 0.5;  // |chi| this far from 1 aborts the diagnostic
};

/// Samples the interference phase chi(phi) over [0, 2pi], fits the phase
/// slope and compares against the transported charge.
ChiDiagnostic interference_phase(const SpectralData& s, const Dressing& d,
                                 const TransportSplit& split,
                                 const ChargeFamily& family, int axis,
                                 double index_for_comparison,
                                 const ChiOptions& opts = {});

// ---------------------------------------------------------------------------

/// Adiabatic curvature i <ground, [K1-, K2-] ground> from the two axis
/// dressings; the imaginary part is asserted to vanish.
double hall_curvature(const DenseVector& ground, const DenseMatrix& k1_minus,
                      const DenseMatrix& k2_minus, double imag_tol = 1e-10);

struct FluxUnitary {
  DenseMatrix u;
  double two_form_residual = 0.0;  // strip charge vs half-torus charge form
  UnitaryVariance var;
  GeneratorPath path;  // constant path generating u (for transport splits)
};

struct FluxOptions {
  double equality_tol = 1e-8;
  double variance_max = -1.0;  // < 0: report only
};

/// e^{-2pi i (Q_- - K_-)} along `axis`, with K_- localized to the strip so
/// the two generator forms coincide. Exposes the constant generator path
/// whose term decomposition is keyed by the crossing terms of H.
FluxUnitary flux_unitary(const SpectralData& s, const LocalHamiltonian& ham,
                         const ChargeFamily& family, int axis,
                         const FluxOptions& opts = {});

}  // namespace fluxlab
