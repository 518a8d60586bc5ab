#include "fluxlab/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace fluxlab {

namespace {
int positive_mod(int a, int m) {
  int r = a % m;
  return r < 0 ? r + m : r;
}
}  // namespace

TorusLattice::TorusLattice(int dimension, int side_length)
    : d_(dimension), L_(side_length) {
  if (d_ < 1 || d_ > 2) {
    throw ParameterError("TorusLattice: dimension must be 1 or 2");
  }
  if (L_ < 4 || L_ % 2 != 0) {
    throw ParameterError("TorusLattice: side length must be even and >= 4");
  }
  volume_ = 1;
  for (int i = 0; i < d_; ++i) volume_ *= L_;
}

int TorusLattice::coordinate(int site, int axis) const {
  if (axis < 1 || axis > d_) throw ParameterError("invalid axis");
  if (site < 0 || site >= volume_) throw ParameterError("invalid site index");
  int idx = site;
  for (int i = 1; i < axis; ++i) idx /= L_;
  idx %= L_;
  // map {0..L-1} -> {-L/2+1..L/2}
  return idx <= L_ / 2 ? idx : idx - L_;
}

int TorusLattice::site_at(const std::vector<int>& coords) const {
  if (static_cast<int>(coords.size()) != d_) {
    throw ParameterError("coordinate count does not match dimension");
  }
  int idx = 0;
  int stride = 1;
  for (int i = 0; i < d_; ++i) {
    idx += positive_mod(coords[i], L_) * stride;
    stride *= L_;
  }
  return idx;
}

int TorusLattice::wrap_distance(int a, int b) const {
  int diff = positive_mod(a - b, L_);
  return std::min(diff, L_ - diff);
}

int TorusLattice::graph_distance(int site_a, int site_b) const {
  int dist = 0;
  for (int axis = 1; axis <= d_; ++axis) {
    dist += wrap_distance(coordinate(site_a, axis), coordinate(site_b, axis));
  }
  return dist;
}

Region::Region(std::vector<int> sites, int axis)
    : sites_(std::move(sites)), axis_(axis) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

bool Region::contains(int site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

bool Region::is_subset_of(const Region& other) const {
  return std::includes(other.sites_.begin(), other.sites_.end(),
                       sites_.begin(), sites_.end());
}

bool operator==(const Region& a, const Region& b) {
  return a.sites_ == b.sites_;
}

Region region_union(const Region& a, const Region& b) {
  std::vector<int> out;
  std::set_union(a.sites_.begin(), a.sites_.end(), b.sites_.begin(),
                 b.sites_.end(), std::back_inserter(out));
  return Region(std::move(out), a.axis());
}

Region region_intersection(const Region& a, const Region& b) {
  std::vector<int> out;
  std::set_intersection(a.sites_.begin(), a.sites_.end(), b.sites_.begin(),
                        b.sites_.end(), std::back_inserter(out));
  return Region(std::move(out), a.axis());
}

Region region_difference(const Region& a, const Region& b) {
  std::vector<int> out;
  std::set_difference(a.sites_.begin(), a.sites_.end(), b.sites_.begin(),
                      b.sites_.end(), std::back_inserter(out));
  return Region(std::move(out), a.axis());
}

Region full_region(const TorusLattice& lat) {
  std::vector<int> sites(lat.size());
  for (int i = 0; i < lat.size(); ++i) sites[i] = i;
  return Region(std::move(sites));
}

Region region_complement(const TorusLattice& lat, const Region& x) {
  return region_difference(full_region(lat), x);
}

namespace {
template <typename Pred>
Region collect_sites(const TorusLattice& lat, int axis, Pred&& pred) {
  if (axis < 1 || axis > lat.dimension()) throw ParameterError("invalid axis");
  std::vector<int> sites;
  for (int s = 0; s < lat.size(); ++s) {
    if (pred(lat.coordinate(s, axis))) sites.push_back(s);
  }
  return Region(std::move(sites), axis);
}
}  // namespace

Region half_torus(const TorusLattice& lat, int axis) {
  return collect_sites(lat, axis,
                       [&](int x) { return 0 <= x && x < lat.side() / 2; });
}

std::pair<Region, Region> boundaries(const TorusLattice& lat, int axis) {
  Region lower = collect_sites(lat, axis, [](int x) { return x == 0; });
  Region upper = collect_sites(
      lat, axis, [&](int x) { return x == lat.side() / 2 - 1; });
  return {lower, upper};
}

Strips strips(const TorusLattice& lat, int axis) {
  const int L = lat.side();
  // |x| and |x - L/2| are periodic distances; inequalities scaled by 8 to
  // stay in integer arithmetic
  Strips out;
  out.minus = collect_sites(
      lat, axis, [&](int x) { return 8 * lat.wrap_distance(x, 0) <= L; });
  out.middle = collect_sites(
      lat, axis, [&](int x) { return L < 8 * x && 8 * x < 3 * L; });
  out.plus = collect_sites(lat, axis, [&](int x) {
    return 8 * lat.wrap_distance(x, L / 2) <= L;
  });
  return out;
}

Region fatten(const TorusLattice& lat, const Region& x, int radius) {
  if (radius < 0) throw ParameterError("fatten: radius must be >= 0");
  if (radius == 0) return x;
  std::vector<int> sites;
  for (int s = 0; s < lat.size(); ++s) {
    for (int member : x.sites()) {
      if (lat.graph_distance(s, member) <= radius) {
        sites.push_back(s);
        break;
      }
    }
  }
  return Region(std::move(sites), x.axis());
}

int d1_distance(const TorusLattice& lat, const Region& x, const Region& y,
                int axis) {
  if (x.empty() || y.empty()) {
    throw ParameterError("d1_distance: regions must be nonempty");
  }
  int best = lat.side();
  for (int a : x.sites()) {
    int ca = lat.coordinate(a, axis);
    for (int b : y.sites()) {
      best = std::min(best, lat.wrap_distance(ca, lat.coordinate(b, axis)));
    }
  }
  return best;
}

int region_diameter(const TorusLattice& lat, const Region& x) {
  int diam = 0;
  const auto& s = x.sites();
  for (size_t i = 0; i < s.size(); ++i) {
    for (size_t j = i + 1; j < s.size(); ++j) {
      diam = std::max(diam, lat.graph_distance(s[i], s[j]));
    }
  }
  return diam;
}

std::string region_to_string(const TorusLattice& lat, const Region& x) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (int s : x.sites()) {
    if (!first) os << ",";
    first = false;
    if (lat.dimension() == 1) {
      os << lat.coordinate(s, 1);
    } else {
      os << "(" << lat.coordinate(s, 1) << "," << lat.coordinate(s, 2) << ")";
    }
  }
  os << "}";
  return os.str();
}

}  // namespace fluxlab
