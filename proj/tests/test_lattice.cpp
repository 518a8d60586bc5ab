#include <catch2/catch_amalgamated.hpp>

#include "fluxlab/lattice.hpp"

using namespace fluxlab;

namespace {
std::vector<int> coords_of(const TorusLattice& lat, const Region& r,
                           int axis = 1) {
  std::vector<int> out;
  for (int s : r.sites()) out.push_back(lat.coordinate(s, axis));
  std::sort(out.begin(), out.end());
  return out;
}
}  // namespace

TEST_CASE("torus basics") {
  TorusLattice lat(1, 8);
  REQUIRE(lat.size() == 8);
  REQUIRE(lat.coordinate(0, 1) == 0);
  REQUIRE(lat.coordinate(4, 1) == 4);
  REQUIRE(lat.coordinate(5, 1) == -3);
  REQUIRE(lat.site_at({-3}) == 5);
  REQUIRE(lat.site_at({8}) == 0);
  REQUIRE_THROWS_AS(TorusLattice(1, 7), ParameterError);
  REQUIRE_THROWS_AS(TorusLattice(3, 8), ParameterError);

  TorusLattice sq(2, 4);
  REQUIRE(sq.size() == 16);
  const int s = sq.site_at({2, -1});
  REQUIRE(sq.coordinate(s, 1) == 2);
  REQUIRE(sq.coordinate(s, 2) == -1);
}

TEST_CASE("half torus") {
  TorusLattice lat(1, 8);
  Region g = half_torus(lat, 1);
  REQUIRE(coords_of(lat, g) == std::vector<int>{0, 1, 2, 3});

  TorusLattice sq(2, 4);
  Region g2 = half_torus(sq, 2);
  REQUIRE(g2.size() == 8);
  for (int s : g2.sites()) {
    const int x2 = sq.coordinate(s, 2);
    REQUIRE((x2 == 0 || x2 == 1));
  }

  TorusLattice big(2, 8);
  REQUIRE(half_torus(big, 1).size() == 32);
  REQUIRE_THROWS_AS(half_torus(lat, 2), ParameterError);
}

TEST_CASE("boundaries") {
  TorusLattice lat(1, 8);
  auto [bm, bp] = boundaries(lat, 1);
  REQUIRE(coords_of(lat, bm) == std::vector<int>{0});
  REQUIRE(coords_of(lat, bp) == std::vector<int>{3});

  TorusLattice sq(2, 4);
  auto [m2, p2] = boundaries(sq, 1);
  REQUIRE(m2.size() == 4);
  REQUIRE(p2.size() == 4);
  REQUIRE(region_intersection(m2, p2).empty());
}

TEST_CASE("strips at L=8") {
  TorusLattice lat(1, 8);
  Strips st = strips(lat, 1);
  REQUIRE(coords_of(lat, st.minus) == std::vector<int>{-1, 0, 1});
  REQUIRE(coords_of(lat, st.middle) == std::vector<int>{2});
  // sites 3, 4, 5 (coordinate 5 wraps to -3)
  REQUIRE(st.plus == Region({3, 4, 5}));
  REQUIRE(region_intersection(st.minus, st.plus).empty());

  TorusLattice lat16(1, 16);
  Strips st16 = strips(lat16, 1);
  REQUIRE(region_intersection(st16.minus, st16.plus).empty());
  REQUIRE(d1_distance(lat16, st16.minus, st16.plus, 1) >= 2);
}

TEST_CASE("strip invariants for admissible sizes") {
  for (int L : {8, 16, 24}) {
    TorusLattice lat(1, L);
    Strips st = strips(lat, 1);
    auto [bm, bp] = boundaries(lat, 1);
    REQUIRE(bm.is_subset_of(st.minus));
    REQUIRE(bp.is_subset_of(st.plus));
    REQUIRE(region_intersection(st.minus, st.middle).empty());
    REQUIRE(region_intersection(st.middle, st.plus).empty());
    // the strips cover the half torus
    Region g = half_torus(lat, 1);
    Region cover = region_union(region_union(st.minus, st.middle), st.plus);
    REQUIRE(g.is_subset_of(cover));
  }
}

TEST_CASE("fatten") {
  TorusLattice lat(1, 8);
  Region x({0});
  REQUIRE(coords_of(lat, fatten(lat, x, 1)) == std::vector<int>{-1, 0, 1});
  REQUIRE(fatten(lat, x, 0) == x);

  TorusLattice lat16(1, 16);
  auto [bm, bp] = boundaries(lat16, 1);
  REQUIRE(coords_of(lat16, fatten(lat16, bm, 16 / 16)) ==
          std::vector<int>{-1, 0, 1});

  // monotone and subadditive
  Region y({0, 1});
  REQUIRE(fatten(lat, x, 2).is_subset_of(fatten(lat, y, 2)));
  Region xr = fatten(lat, x, 1);
  REQUIRE(fatten(lat, xr, 1).is_subset_of(fatten(lat, x, 2)));
}

TEST_CASE("d1 distance") {
  TorusLattice lat(1, 8);
  REQUIRE(d1_distance(lat, Region({0}), Region({3}), 1) == 3);
  REQUIRE(d1_distance(lat, Region({2}), Region({2}), 1) == 0);
  REQUIRE(d1_distance(lat, Region({1}), Region({7}), 1) == 2);
  REQUIRE_THROWS_AS(d1_distance(lat, Region(std::vector<int>{}), Region({0}), 1),
                    ParameterError);

  // symmetry and d1 <= graph distance
  TorusLattice sq(2, 8);
  Region a({sq.site_at({0, 0})});
  Region b({sq.site_at({3, 2})});
  REQUIRE(d1_distance(sq, a, b, 1) == d1_distance(sq, b, a, 1));
  REQUIRE(d1_distance(sq, a, b, 1) <=
          sq.graph_distance(a.sites()[0], b.sites()[0]));
}

TEST_CASE("complement partition") {
  for (int axis : {1, 2}) {
    TorusLattice sq(2, 4);
    Region g = half_torus(sq, axis);
    Region gc = region_complement(sq, g);
    REQUIRE(region_intersection(g, gc).empty());
    REQUIRE(region_union(g, gc) == full_region(sq));
  }
}
