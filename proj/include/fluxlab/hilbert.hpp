#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fluxlab/lattice.hpp"
#include "fluxlab/numerics.hpp"

namespace fluxlab {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ParticleKind { Spin, Fermion };

/// Declares the local structure: per-site levels (spin) or orbitals
/// (fermion), and the integer charge carried by each level/orbital.
struct HilbertSpec {
  ParticleKind kind = ParticleKind::Spin;
  int local_dim = 2;  // spin levels per site, or orbitals per site
  TorusLattice lattice{1, 4};
  std::vector<int> charge_per_level;  // spin: per level; fermion: per orbital

  /// levels per site in the occupation basis (spin: local_dim,
  /// fermion: 2^local_dim)
  int site_levels() const;
  /// charge of a site-level index
  int level_charge(int level) const;
};

/// Enumerable occupation/spin basis. Either the full space or the subspace
/// of fixed total charge (all charge operators here are diagonal, so charge
/// sectors are exact invariant subspaces of every operator this laboratory
/// constructs). Configurations are encoded site-major with the first axis
/// fastest; fermionic orbitals are bits within the site digit, and the
/// Jordan-Wigner string runs along this fixed mode order.
class ManyBodySpace {
 public:
  static std::shared_ptr<const ManyBodySpace> full(
      const HilbertSpec& spec, std::int64_t dimension_cap = (1 << 22));
  static std::shared_ptr<const ManyBodySpace> charge_sector(
      const HilbertSpec& spec, int total_charge,
      std::int64_t dimension_cap = (1 << 22));

  const HilbertSpec& spec() const { return spec_; }
  const TorusLattice& lattice() const { return spec_.lattice; }
  bool is_sector() const { return sector_charge_.has_value(); }
  std::optional<int> sector_charge() const { return sector_charge_; }

  std::int64_t dim() const;
  std::uint64_t config(std::int64_t index) const;
  std::optional<std::int64_t> index_of(std::uint64_t config) const;

  int site_level(std::uint64_t config, int site) const;
  std::uint64_t with_site_level(std::uint64_t config, int site,
                                int level) const;
  int total_charge_of(std::uint64_t config) const;

  // fermionic helpers (mode = site * local_dim + orbital)
  bool mode_occupied(std::uint64_t config, int mode) const;
  /// +1/-1 parity of occupied modes strictly below `mode`
  int jordan_wigner_sign(std::uint64_t config, int mode) const;

 private:
  ManyBodySpace() = default;
  HilbertSpec spec_;
  std::optional<int> sector_charge_;
  std::int64_t full_dim_ = 0;
  std::vector<std::uint64_t> configs_;  // only for sectors
  int bits_per_site_ = 0;               // fermion fast path; 0 for spin
  std::vector<std::int64_t> site_stride_;
};

/// Per-site integer charge operators and their region sums, all diagonal in
/// the occupation basis.
class ChargeFamily {
 public:
  explicit ChargeFamily(std::shared_ptr<const ManyBodySpace> space);

  const ManyBodySpace& space() const { return *space_; }
  std::shared_ptr<const ManyBodySpace> space_ptr() const { return space_; }

  /// Diagonal of Q_X
  RealVector region_diagonal(const Region& x) const;
  /// Diagonal of Q_x for one site
  RealVector site_diagonal(int site) const;

 private:
  std::shared_ptr<const ManyBodySpace> space_;
  std::vector<RealVector> site_diagonals_;
};

// ---------------------------------------------------------------------------
// Local terms

/// Spin term: dense block over the joint levels of `sites`, the first listed
/// site being the fastest index.
struct SpinTermData {
  std::vector<int> sites;
  DenseMatrix block;
};

struct FermionOp {
  int site = 0;
  int orbital = 0;
  bool dagger = false;
};

/// coeff * op[0] * op[1] * ... (leftmost applied last)
struct FermionMonomial {
  Complex coeff;
  std::vector<FermionOp> ops;
};

struct FermionTermData {
  std::vector<FermionMonomial> monomials;
};

struct LocalTerm {
  std::string name;
  Region support;
  std::variant<SpinTermData, FermionTermData> data;
};

SparseMatrix materialize(const ManyBodySpace& space, const LocalTerm& term);
SparseMatrix materialize_sum(const ManyBodySpace& space,
                             const std::vector<LocalTerm>& terms);

// common builders
LocalTerm spin_site_term(const std::string& name, int site,
                         const DenseMatrix& op);
LocalTerm spin_two_site_term(const std::string& name, int site_a, int site_b,
                             const DenseMatrix& op_a, const DenseMatrix& op_b,
                             Complex coeff = 1.0, bool add_adjoint = false);
/// amp * c^dag_{a} c_{b} + h.c. (single-orbital shorthand)
LocalTerm hopping_term(const std::string& name, int site_a, int site_b,
                       Complex amp);
/// value * n_{site}
LocalTerm number_term(const std::string& name, int site, double value);
/// value * n_a n_b
LocalTerm density_density_term(const std::string& name, int site_a, int site_b,
                               double value);

// spin-1/2 single-site matrices
DenseMatrix pauli_x();
DenseMatrix pauli_y();
DenseMatrix pauli_z();
DenseMatrix spin_raise();

// ---------------------------------------------------------------------------
// Hamiltonians

struct LocalHamiltonian {
  std::vector<LocalTerm> terms;
  int range = 0;          // max term diameter
  double strength = 0.0;  // max term norm
  bool charge_conserving = false;
};

/// A lattice model: spec plus Hamiltonian terms.
struct ModelSystem {
  HilbertSpec spec;
  std::vector<LocalTerm> terms;
};

struct AssembleOptions {
  bool require_charge_conservation = true;
  double tol = 1e-12;
};

/// Validates hermiticity, evenness (fermions) and charge conservation term
/// by term; measures range and strength. Violations name the term.
LocalHamiltonian assemble_hamiltonian(const ManyBodySpace& space,
                                      const std::vector<LocalTerm>& terms,
                                      const ChargeFamily& family,
                                      const AssembleOptions& opts = {});

}  // namespace fluxlab
