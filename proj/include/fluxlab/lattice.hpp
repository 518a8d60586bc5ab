#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluxlab {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Discrete d-torus with even side length L. Coordinates along each axis
/// live in {-L/2+1, ..., L/2} and wrap periodically; sites are indexed
/// 0..L^d-1 with axis 1 fastest.
class TorusLattice {
 public:
  TorusLattice(int dimension, int side_length);

  int dimension() const { return d_; }
  int side() const { return L_; }
  int size() const { return volume_; }

  /// Coordinate of `site` along `axis` (1-based), in {-L/2+1, ..., L/2}.
  int coordinate(int site, int axis) const;

  /// Site index from coordinates (any integers; wrapped periodically).
  int site_at(const std::vector<int>& coords) const;

  /// Minimal periodic distance between two coordinate values.
  int wrap_distance(int a, int b) const;

  /// Periodic l1 distance between sites (graph distance of the
  /// nearest-neighbour torus graph).
  int graph_distance(int site_a, int site_b) const;

 private:
  int d_;
  int L_;
  int volume_;
};

/// A subset of lattice sites, kept sorted and duplicate-free. The optional
/// axis tag records which axis the region's construction referred to, so
/// axis-superscripted constructions share one code path.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<int> sites, int axis = 1);

  const std::vector<int>& sites() const { return sites_; }
  int axis() const { return axis_; }
  bool contains(int site) const;
  bool empty() const { return sites_.empty(); }
  int size() const { return static_cast<int>(sites_.size()); }

  bool is_subset_of(const Region& other) const;

  friend Region region_union(const Region& a, const Region& b);
  friend Region region_intersection(const Region& a, const Region& b);
  friend Region region_difference(const Region& a, const Region& b);
  friend bool operator==(const Region& a, const Region& b);

 private:
  std::vector<int> sites_;
  int axis_ = 1;
};

Region region_union(const Region& a, const Region& b);
Region region_intersection(const Region& a, const Region& b);
Region region_difference(const Region& a, const Region& b);
Region full_region(const TorusLattice& lat);
Region region_complement(const TorusLattice& lat, const Region& x);

/// Half torus {0 <= x_axis < L/2}.
Region half_torus(const TorusLattice& lat, int axis);

/// The two boundary hyperplanes of the half torus: ({x_axis = 0},
/// {x_axis = L/2 - 1}).
std::pair<Region, Region> boundaries(const TorusLattice& lat, int axis);

struct Strips {
  Region minus;   // {-L/8 <= x <= L/8}
  Region middle;  // { L/8 <  x <  L/2 - L/8}
  Region plus;    // {-L/8 <= x - L/2 <= L/8}
};

/// The three transition strips around the half-torus boundary. The defining
/// inequalities are evaluated with exact rational comparisons (8*x vs L), so
/// any even L >= 4 is accepted.
Strips strips(const TorusLattice& lat, int axis);

/// Closure {x : dist(x, X) <= r} in graph distance.
Region fatten(const TorusLattice& lat, const Region& x, int radius);

/// min |x_axis - y_axis| (periodic) over x in X, y in Y.
int d1_distance(const TorusLattice& lat, const Region& x, const Region& y,
                int axis);

/// max graph distance between members of X (0 for singletons).
int region_diameter(const TorusLattice& lat, const Region& x);

std::string region_to_string(const TorusLattice& lat, const Region& x);

}  // namespace fluxlab
