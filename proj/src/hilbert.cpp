#include "fluxlab/hilbert.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace fluxlab {

int HilbertSpec::site_levels() const {
  return kind == ParticleKind::Spin ? local_dim : (1 << local_dim);
}

int HilbertSpec::level_charge(int level) const {
  if (kind == ParticleKind::Spin) {
    return charge_per_level.at(level);
  }
  int q = 0;
  for (int orb = 0; orb < local_dim; ++orb) {
    if (level & (1 << orb)) q += charge_per_level.at(orb);
  }
  return q;
}

namespace {
std::int64_t checked_power(std::int64_t base, int exp, std::int64_t cap) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > cap / base) {
      throw ResourceError("many-body dimension exceeds the configured cap");
    }
    out *= base;
  }
  return out;
}

void validate_spec(const HilbertSpec& spec) {
  if (spec.local_dim < 1) throw ParameterError("local_dim must be >= 1");
  const int want = spec.local_dim;
  if (static_cast<int>(spec.charge_per_level.size()) != want) {
    throw ParameterError("charge_per_level size must match local_dim");
  }
}
}  // namespace

std::shared_ptr<const ManyBodySpace> ManyBodySpace::full(
    const HilbertSpec& spec, std::int64_t dimension_cap) {
  validate_spec(spec);
  auto space = std::shared_ptr<ManyBodySpace>(new ManyBodySpace());
  space->spec_ = spec;
  const int sites = spec.lattice.size();
  space->full_dim_ = checked_power(spec.site_levels(), sites, dimension_cap);
  space->bits_per_site_ =
      spec.kind == ParticleKind::Fermion ? spec.local_dim : 0;
  space->site_stride_.resize(sites);
  std::int64_t stride = 1;
  for (int s = 0; s < sites; ++s) {
    space->site_stride_[s] = stride;
    stride *= spec.site_levels();
  }
  return space;
}

std::shared_ptr<const ManyBodySpace> ManyBodySpace::charge_sector(
    const HilbertSpec& spec, int total_charge, std::int64_t dimension_cap) {
  auto full_space = full(spec, dimension_cap);
  auto space = std::shared_ptr<ManyBodySpace>(new ManyBodySpace(*full_space));
  space->sector_charge_ = total_charge;
  space->configs_.reserve(1024);
  for (std::int64_t c = 0; c < space->full_dim_; ++c) {
    if (space->total_charge_of(static_cast<std::uint64_t>(c)) == total_charge) {
      space->configs_.push_back(static_cast<std::uint64_t>(c));
    }
  }
  return space;
}

std::int64_t ManyBodySpace::dim() const {
  return is_sector() ? static_cast<std::int64_t>(configs_.size()) : full_dim_;
}

std::uint64_t ManyBodySpace::config(std::int64_t index) const {
  return is_sector() ? configs_[index] : static_cast<std::uint64_t>(index);
}

std::optional<std::int64_t> ManyBodySpace::index_of(
    std::uint64_t config) const {
  if (!is_sector()) {
    return static_cast<std::int64_t>(config);
  }
  auto it = std::lower_bound(configs_.begin(), configs_.end(), config);
  if (it == configs_.end() || *it != config) return std::nullopt;
  return static_cast<std::int64_t>(it - configs_.begin());
}

int ManyBodySpace::site_level(std::uint64_t config, int site) const {
  if (bits_per_site_ > 0) {
    return static_cast<int>((config >> (site * bits_per_site_)) &
                            ((1u << bits_per_site_) - 1));
  }
  return static_cast<int>((config / site_stride_[site]) % spec_.site_levels());
}

std::uint64_t ManyBodySpace::with_site_level(std::uint64_t config, int site,
                                             int level) const {
  const int old = site_level(config, site);
  if (bits_per_site_ > 0) {
    const std::uint64_t mask = ((1ull << bits_per_site_) - 1)
                               << (site * bits_per_site_);
    return (config & ~mask) |
           (static_cast<std::uint64_t>(level) << (site * bits_per_site_));
  }
  return config + static_cast<std::uint64_t>((level - old) *
                                             site_stride_[site]);
}

int ManyBodySpace::total_charge_of(std::uint64_t config) const {
  int q = 0;
  for (int s = 0; s < spec_.lattice.size(); ++s) {
    q += spec_.level_charge(site_level(config, s));
  }
  return q;
}

bool ManyBodySpace::mode_occupied(std::uint64_t config, int mode) const {
  return (config >> mode) & 1u;
}

int ManyBodySpace::jordan_wigner_sign(std::uint64_t config, int mode) const {
  const std::uint64_t below = config & ((1ull << mode) - 1);
  return (std::popcount(below) % 2 == 0) ? 1 : -1;
}

ChargeFamily::ChargeFamily(std::shared_ptr<const ManyBodySpace> space)
    : space_(std::move(space)) {
  const int sites = space_->lattice().size();
  const std::int64_t dim = space_->dim();
  site_diagonals_.resize(sites);
  for (int s = 0; s < sites; ++s) {
    site_diagonals_[s].resize(dim);
  }
  for (std::int64_t i = 0; i < dim; ++i) {
    const std::uint64_t c = space_->config(i);
    for (int s = 0; s < sites; ++s) {
      site_diagonals_[s](i) = space_->spec().level_charge(
          space_->site_level(c, s));
    }
  }
}

RealVector ChargeFamily::site_diagonal(int site) const {
  return site_diagonals_.at(site);
}

RealVector ChargeFamily::region_diagonal(const Region& x) const {
  RealVector out = RealVector::Zero(space_->dim());
  for (int s : x.sites()) out += site_diagonals_.at(s);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using Triplet = Eigen::Triplet<Complex>;

void emit_spin_term(const ManyBodySpace& space, const SpinTermData& term,
                    std::vector<Triplet>& out) {
  if (space.spec().kind != ParticleKind::Spin) {
    throw ValidationError("spin term on a non-spin space");
  }
  const int n = space.spec().local_dim;
  const int k = static_cast<int>(term.sites.size());
  std::int64_t block_dim = 1;
  for (int i = 0; i < k; ++i) block_dim *= n;
  if (term.block.rows() != block_dim || term.block.cols() != block_dim) {
    throw ValidationError("spin term block dimension mismatch");
  }
  const std::int64_t dim = space.dim();
  for (std::int64_t col = 0; col < dim; ++col) {
    const std::uint64_t c = space.config(col);
    std::int64_t pattern = 0;
    std::int64_t stride = 1;
    for (int i = 0; i < k; ++i) {
      pattern += stride * space.site_level(c, term.sites[i]);
      stride *= n;
    }
    for (std::int64_t row_pat = 0; row_pat < block_dim; ++row_pat) {
      const Complex amp = term.block(row_pat, pattern);
      if (amp == Complex(0.0, 0.0)) continue;
      std::uint64_t target = c;
      std::int64_t rp = row_pat;
      for (int i = 0; i < k; ++i) {
        target = space.with_site_level(target, term.sites[i],
                                       static_cast<int>(rp % n));
        rp /= n;
      }
      auto idx = space.index_of(target);
      if (!idx) {
        throw ValidationError(
            "term maps outside the charge sector (not charge conserving)");
      }
      out.emplace_back(*idx, col, amp);
    }
  }
}

void emit_fermion_term(const ManyBodySpace& space, const FermionTermData& term,
                       std::vector<Triplet>& out) {
  if (space.spec().kind != ParticleKind::Fermion) {
    throw ValidationError("fermion term on a non-fermion space");
  }
  const int n_orb = space.spec().local_dim;
  const std::int64_t dim = space.dim();
  for (std::int64_t col = 0; col < dim; ++col) {
    const std::uint64_t c = space.config(col);
    for (const auto& mono : term.monomials) {
      std::uint64_t cur = c;
      int sign = 1;
      bool dead = false;
      for (auto it = mono.ops.rbegin(); it != mono.ops.rend(); ++it) {
        const int mode = it->site * n_orb + it->orbital;
        const bool occ = space.mode_occupied(cur, mode);
        if (it->dagger == occ) {  // creating occupied or destroying empty
          dead = true;
          break;
        }
        sign *= space.jordan_wigner_sign(cur, mode);
        cur ^= (1ull << mode);
      }
      if (dead) continue;
      auto idx = space.index_of(cur);
      if (!idx) {
        throw ValidationError(
            "term maps outside the charge sector (not charge conserving)");
      }
      out.emplace_back(*idx, col, mono.coeff * static_cast<double>(sign));
    }
  }
}

}  // namespace

SparseMatrix materialize(const ManyBodySpace& space, const LocalTerm& term) {
  std::vector<Triplet> triplets;
  if (std::holds_alternative<SpinTermData>(term.data)) {
    emit_spin_term(space, std::get<SpinTermData>(term.data), triplets);
  } else {
    emit_fermion_term(space, std::get<FermionTermData>(term.data), triplets);
  }
  SparseMatrix m(space.dim(), space.dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseMatrix materialize_sum(const ManyBodySpace& space,
                             const std::vector<LocalTerm>& terms) {
  std::vector<Triplet> triplets;
  for (const auto& term : terms) {
    if (std::holds_alternative<SpinTermData>(term.data)) {
      emit_spin_term(space, std::get<SpinTermData>(term.data), triplets);
    } else {
      emit_fermion_term(space, std::get<FermionTermData>(term.data), triplets);
    }
  }
  SparseMatrix m(space.dim(), space.dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

LocalTerm spin_site_term(const std::string& name, int site,
                         const DenseMatrix& op) {
  LocalTerm t;
  t.name = name;
  t.support = Region({site});
  t.data = SpinTermData{{site}, op};
  return t;
}

LocalTerm spin_two_site_term(const std::string& name, int site_a, int site_b,
                             const DenseMatrix& op_a, const DenseMatrix& op_b,
                             Complex coeff, bool add_adjoint) {
  const int n = static_cast<int>(op_a.rows());
  DenseMatrix block(n * n, n * n);
  for (int rb = 0; rb < n; ++rb)
    for (int ra = 0; ra < n; ++ra)
      for (int cb = 0; cb < n; ++cb)
        for (int ca = 0; ca < n; ++ca)
          block(rb * n + ra, cb * n + ca) = coeff * op_b(rb, cb) * op_a(ra, ca);
  if (add_adjoint) block += DenseMatrix(block.adjoint());
  LocalTerm t;
  t.name = name;
  t.support = Region({site_a, site_b});
  t.data = SpinTermData{{site_a, site_b}, block};
  return t;
}

LocalTerm hopping_term(const std::string& name, int site_a, int site_b,
                       Complex amp) {
  FermionTermData data;
  data.monomials.push_back(
      {amp, {{site_a, 0, true}, {site_b, 0, false}}});
  data.monomials.push_back(
      {std::conj(amp), {{site_b, 0, true}, {site_a, 0, false}}});
  LocalTerm t;
  t.name = name;
  t.support = Region({site_a, site_b});
  t.data = std::move(data);
  return t;
}

LocalTerm number_term(const std::string& name, int site, double value) {
  FermionTermData data;
  data.monomials.push_back(
      {Complex(value, 0), {{site, 0, true}, {site, 0, false}}});
  LocalTerm t;
  t.name = name;
  t.support = Region({site});
  t.data = std::move(data);
  return t;
}

LocalTerm density_density_term(const std::string& name, int site_a, int site_b,
                               double value) {
  FermionTermData data;
  data.monomials.push_back({Complex(value, 0),
                            {{site_a, 0, true},
                             {site_a, 0, false},
                             {site_b, 0, true},
                             {site_b, 0, false}}});
  LocalTerm t;
  t.name = name;
  t.support = Region({site_a, site_b});
  t.data = std::move(data);
  return t;
}

DenseMatrix pauli_x() {
  DenseMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
DenseMatrix pauli_y() {
  DenseMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
DenseMatrix pauli_z() {
  DenseMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
DenseMatrix spin_raise() {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(1, 0) = 1.0;  // |1><0|, level 1 = up
  return m;
}

LocalHamiltonian assemble_hamiltonian(const ManyBodySpace& space,
                                      const std::vector<LocalTerm>& terms,
                                      const ChargeFamily& family,
                                      const AssembleOptions& opts) {
  LocalHamiltonian h;
  h.charge_conserving = true;
  const RealVector total_q =
      family.region_diagonal(full_region(space.lattice()));
  for (const auto& term : terms) {
    if (std::holds_alternative<FermionTermData>(term.data)) {
      for (const auto& mono : std::get<FermionTermData>(term.data).monomials) {
        if (mono.ops.size() % 2 != 0) {
          throw ValidationError("term '" + term.name +
                                "' is odd (fermion parity)");
        }
      }
    }
    SparseMatrix m = materialize(space, term);
    const double herm_resid =
        SparseMatrix(m - SparseMatrix(m.adjoint())).norm();
    if (herm_resid > opts.tol * std::max(1.0, m.norm())) {
      throw ValidationError("term '" + term.name + "' is not hermitian");
    }
    // [term, Q_Lambda]: elementwise m_ij (q_j - q_i)
    double comm = 0.0;
    for (int k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        comm = std::max(comm, std::abs(it.value()) *
                                  std::abs(total_q(it.col()) -
                                           total_q(it.row())));
      }
    }
    if (opts.require_charge_conservation && comm > opts.tol) {
      throw ValidationError("term '" + term.name +
                            "' violates charge conservation");
    }
    h.range = std::max(h.range, region_diameter(space.lattice(), term.support));
    h.strength = std::max(h.strength, spectral_norm(m));
    h.terms.push_back(term);
  }
  return h;
}

}  // namespace fluxlab
