#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "serre/autgrp.hpp"

using namespace serre;
using namespace testutil;

namespace {

// Brute-force oracle: count automorphisms of a simple graph by trying every
// vertex bijection.
long long brute_simple_aut_count(const SerreGraph& g) {
  int n = g.num_vertices();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (int d = 0; d < g.num_darts(); ++d) adj[g.iota(d)][g.tau(d)] = 1;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  long long count = 0;
  do {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = 0; j < n && ok; ++j)
        if (adj[i][j] != adj[perm[i]][perm[j]]) ok = false;
    if (ok) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

// smallest asymmetric graph: 6 vertices, 6 edges
SerreGraph asymmetric6() {
  GraphBuilder b;
  for (int i = 0; i < 6; ++i) b.add_vertex("a" + std::to_string(i));
  int e = 0;
  for (auto [u, v] : std::vector<std::pair<int, int>>{
           {0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 5}, {2, 5}})
    b.add_edge("a" + std::to_string(u), "a" + std::to_string(v),
               "ae" + std::to_string(e++));
  return b.build();
}

}  // namespace

TEST_CASE("automorphism group of K4 has order 24") {
  SerreGraph k4 = complete(4);
  auto aut = automorphism_group(k4);
  CHECK(aut.order() == 24);
  CHECK(aut.order() == brute_simple_aut_count(k4));
}

TEST_CASE("automorphism group of the decorated 4-cycle has order 128") {
  SerreGraph g = decorated_cycle(4);
  auto res = automorphism_group_full(g);
  CHECK(res.group.order() == 128);
  // orbit-stabilizer cross-check: |orbit of a cycle vertex| * |stabilizer|
  int c0 = res.group.index_of("v:c0");
  CHECK((long long)orbit_of(res.group, c0).size() *
            point_stabilizer(res.group, c0).order() ==
        128);
}

TEST_CASE("smallest asymmetric graph has trivial automorphism group") {
  SerreGraph g = asymmetric6();
  CHECK(brute_simple_aut_count(g) == 1);
  CHECK(automorphism_group(g).order() == 1);
}

TEST_CASE("automorphism generators preserve structure and colors") {
  SerreGraph g = decorated_cycle(3);
  Coloring c;
  for (const auto& v : g.vertex_ids()) c.vertex[v] = v[0] == 'c' ? "cyc" : "leaf";
  for (const auto& d : g.dart_ids()) c.dart[d] = "";
  auto res = automorphism_group_full(g, &c);
  for (const auto& m : res.elements) {
    for (int d = 0; d < g.num_darts(); ++d) {
      CHECK(m.d[g.bar(d)] == g.bar(m.d[d]));
      CHECK(m.v[g.iota(d)] == g.iota(m.d[d]));
      CHECK(m.v[g.tau(d)] == g.tau(m.d[d]));
    }
    for (int v = 0; v < g.num_vertices(); ++v)
      CHECK(c.vcolor(g, v) == c.vcolor(g, m.v[v]));
  }
}

TEST_CASE("colors constrain the automorphism group") {
  SerreGraph c4 = cycle(4);
  CHECK(automorphism_group(c4).order() == 8);
  Coloring c;
  for (const auto& v : c4.vertex_ids()) c.vertex[v] = v;  // every vertex its own color
  CHECK(automorphism_group(c4, &c).order() == 1);
}

TEST_CASE("color refinement never separates vertices matched by an automorphism") {
  for (auto g : {cycle(6), star(3), decorated_cycle(3), banana(3)}) {
    auto classes = stable_classes(g);
    auto res = automorphism_group_full(g);
    for (const auto& m : res.elements)
      for (int v = 0; v < g.num_vertices(); ++v)
        CHECK(classes.vclass[v] == classes.vclass[m.v[v]]);
  }
}

TEST_CASE("isomorphism search distinguishes graphs") {
  CHECK(is_isomorphic(cycle(6), barycentric_subdivision(cycle(3)).graph));
  CHECK_FALSE(is_isomorphic(cycle(6), path(6)));
  CHECK_FALSE(is_isomorphic(complete(4), complete_bipartite(2, 2)));
  CHECK(is_isomorphic(complete_bipartite(2, 2), cycle(4)));
}

TEST_CASE("canonical strings agree exactly for isomorphic colored graphs") {
  // relabeled copies share the canonical string
  CHECK(canonical_string(cycle(5)) == canonical_string(cycle(5, "z")));
  CHECK(canonical_string(complete(4)) != canonical_string(complete_bipartite(2, 2)));
  // a loop with two differently colored darts, in either storage order
  GraphBuilder b1, b2;
  b1.add_vertex("v");
  b1.add_edge("v", "v", "e", "f");
  b2.add_vertex("v");
  b2.add_edge("v", "v", "f", "e");
  Coloring col;
  col.dart["e"] = "red";
  col.dart["f"] = "blue";
  CHECK(canonical_string(b1.build(), &col) == canonical_string(b2.build(), &col));
  Coloring other;
  other.dart["e"] = "red";
  other.dart["f"] = "red";
  CHECK(canonical_string(b1.build(), &col) != canonical_string(b1.build(), &other));
}

TEST_CASE("orbit bound: dihedral action on plain n-cycles gives 2") {
  for (int n : {4, 5, 6}) {
    SerreGraph g = cycle(n);
    auto aut = automorphism_group(g);
    CHECK(aut.order() == 2 * n);
    auto a = automorphism_action(g, aut);
    auto ob = vertex_stabilizer_orbit_bound(a);
    CHECK(ob.bound == 2);  // a vertex stabilizer moves y to its mirror image
  }
}

TEST_CASE("orbit bound: full group of the decorated 4-cycle attains 4") {
  // a cycle-vertex stabilizer contains the mirror through that vertex, so
  // the orbit of a leaf reaches the mirrored pair as well: four leaves
  SerreGraph g = decorated_cycle(4);
  auto a = automorphism_action(g, automorphism_group(g));
  auto ob = vertex_stabilizer_orbit_bound(a);
  CHECK(ob.bound == 4);
}

TEST_CASE("orbit bound: trivial action gives 1") {
  SerreGraph g = cycle(5);
  GroupAction a(PermGroup::trivial({"g"}), g, {}, {});
  CHECK(vertex_stabilizer_orbit_bound(a).bound == 1);
}

TEST_CASE("orbit bound matches the stabilizer-orbit-partition computation") {
  // two independent routes: direct max |G_x . y| vs the largest block of the
  // orbit partition of each vertex stabilizer
  for (auto g : {cycle(5), star(3), decorated_cycle(3)}) {
    auto a = automorphism_action(g, automorphism_group(g));
    auto ob = vertex_stabilizer_orbit_bound(a);
    long long alt = 0;
    for (int x = 0; x < g.num_vertices(); ++x) {
      auto part = a.vertex_orbit_partition(a.vertex_stabilizer(x));
      for (const auto& blk : part.blocks)
        alt = std::max(alt, (long long)blk.size());
    }
    CHECK(ob.bound == alt);
  }
}

TEST_CASE("leaf pairs on a vertex-transitive graph: order and normal swap subgroup") {
  // attaching a pair of leaves at every vertex multiplies the automorphism
  // group by at least 2^|V| and the leaf-swap subgroup is normal
  for (int n : {3, 4}) {
    SerreGraph base = cycle(n);
    long long base_order = automorphism_group(base).order();
    SerreGraph g = decorated_cycle(n);
    auto res = automorphism_group_full(g);
    long long total = res.group.order();
    CHECK(total >= (1ll << n) * base_order);
    // generators of the swap subgroup: swap x_i and y_i
    std::vector<Perm> swaps;
    for (int i = 0; i < n; ++i) {
      GraphMap m;
      m.v = perm_identity(g.num_vertices());
      m.d = perm_identity(g.num_darts());
      std::swap(m.v[g.vertex_index("x" + std::to_string(i))],
                m.v[g.vertex_index("y" + std::to_string(i))]);
      int fx = g.dart_index("fx" + std::to_string(i));
      int fy = g.dart_index("fy" + std::to_string(i));
      std::swap(m.d[fx], m.d[fy]);
      std::swap(m.d[g.bar(fx)], m.d[g.bar(fy)]);
      swaps.push_back(graphmap_to_domain_perm(g, m));
    }
    PermGroup swap_sub = res.group.with_generators(swaps);
    CHECK(swap_sub.order() == (1ll << n));
    CHECK(is_normal_in(res.group, swap_sub));
  }
}
