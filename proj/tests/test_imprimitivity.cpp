#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "serre/autgrp.hpp"
#include "serre/imprimitivity.hpp"

using namespace serre;
using namespace testutil;

namespace {

// action of the full automorphism group on the decorated n-cycle, plus its
// leaf-swap subgroup
struct Decorated {
  SerreGraph graph;
  GroupAction action;
  PermGroup swaps;
};

Decorated decorated(int n) {
  Decorated out;
  out.graph = decorated_cycle(n);
  auto res = automorphism_group_full(out.graph);
  out.action = automorphism_action(out.graph, res.group);
  std::vector<Perm> swaps;
  for (int i = 0; i < n; ++i) {
    GraphMap m;
    m.v = perm_identity(out.graph.num_vertices());
    m.d = perm_identity(out.graph.num_darts());
    std::swap(m.v[out.graph.vertex_index("x" + std::to_string(i))],
              m.v[out.graph.vertex_index("y" + std::to_string(i))]);
    int fx = out.graph.dart_index("fx" + std::to_string(i));
    int fy = out.graph.dart_index("fy" + std::to_string(i));
    std::swap(m.d[fx], m.d[fy]);
    std::swap(m.d[out.graph.bar(fx)], m.d[out.graph.bar(fy)]);
    swaps.push_back(graphmap_to_domain_perm(out.graph, m));
  }
  out.swaps = res.group.with_generators(swaps);
  return out;
}

}  // namespace

TEST_CASE("imprimitivity_from_normal: leaf-swap subgroup on the decorated 4-cycle") {
  auto d = decorated(4);
  CHECK(d.swaps.order() == 16);
  CHECK(is_normal_in(d.action.group(), d.swaps));
  auto p = imprimitivity_from_normal(d.action, d.swaps);
  // 4 leaf pairs + 4 cycle-vertex singletons
  CHECK(p.num_blocks() == 8);
  int pairs = 0, singles = 0;
  for (const auto& b : p.blocks) {
    if (b.size() == 2) ++pairs;
    if (b.size() == 1) ++singles;
  }
  CHECK(pairs == 4);
  CHECK(singles == 4);
  for (const auto& b : p.blocks)
    if (b.size() == 2) {
      CHECK(d.graph.vertex_id(b[0])[0] != 'c');
      CHECK(d.graph.vertex_id(b[1])[0] != 'c');
    }
}

TEST_CASE("imprimitivity_from_normal: trivial and full subgroups") {
  auto d = decorated(3);
  auto triv = d.action.group().with_generators({});
  auto p = imprimitivity_from_normal(d.action, triv);
  CHECK(p.num_blocks() == d.graph.num_vertices());

  // the whole group on a transitive action gives a single block; take the
  // dihedral action on a plain cycle
  SerreGraph c4 = cycle(4);
  auto aut = automorphism_group(c4);
  auto a = automorphism_action(c4, aut);
  auto whole = imprimitivity_from_normal(a, aut);
  CHECK(whole.num_blocks() == 1);
}

TEST_CASE("imprimitivity_from_normal rejects non-normal subgroups") {
  SerreGraph c4 = cycle(4);
  auto res = automorphism_group_full(c4);
  auto a = automorphism_action(c4, res.group);
  // a single reflection generates a non-normal order-2 subgroup of D4
  Perm refl;
  for (const auto& m : res.elements) {
    Perm p = graphmap_to_domain_perm(c4, m);
    if (!perm_is_identity(p) && perm_compose(p, p) == perm_identity((int)p.size()) &&
        p[c4.vertex_index("c0")] == c4.vertex_index("c0")) {
      refl = p;
      break;
    }
  }
  REQUIRE(!refl.empty());
  auto sub = res.group.with_generators({refl});
  CHECK_THROWS_WITH_AS(imprimitivity_from_normal(a, sub),
                       doctest::Contains("NotNormal"), error);
}

TEST_CASE("induced quotient action on the decorated 4-cycle") {
  auto d = decorated(4);
  auto p = imprimitivity_from_normal(d.action, d.swaps);
  auto iq = induced_quotient_action(d.action, p);
  // quotient is the 4-cycle with one leaf per vertex
  CHECK(iq.quotient.graph.num_vertices() == 8);
  CHECK(iq.kernel.order() == 16);
  // the kernel is exactly the leaf-swap subgroup
  CHECK(iq.kernel.is_subgroup_of(d.swaps));
  CHECK(d.swaps.is_subgroup_of(iq.kernel));
  // the induced action of the order-8 quotient is faithful on the quotient
  CHECK(d.action.group().order() / iq.kernel.order() == 8);
}

TEST_CASE("induced quotient: singleton blocks keep a faithful action faithful") {
  SerreGraph c5 = cycle(5);
  auto a = automorphism_action(c5, automorphism_group(c5));
  auto iq = induced_quotient_action(a, VertexPartition::singletons(5));
  CHECK(iq.kernel.order() == 1);
}

TEST_CASE("induced quotient: one block kills everything") {
  SerreGraph c4 = cycle(4);
  auto a = automorphism_action(c4, automorphism_group(c4));
  std::vector<std::vector<int>> one{{0, 1, 2, 3}};
  auto iq = induced_quotient_action(a, VertexPartition::from_blocks(4, one));
  CHECK(iq.kernel.order() == a.group().order());
}

TEST_CASE("induced quotient rejects non-invariant partitions") {
  SerreGraph c4 = cycle(4);
  auto a = automorphism_action(c4, automorphism_group(c4));
  std::vector<std::vector<int>> bad{{0, 1}, {2}, {3}};
  CHECK_THROWS_WITH_AS(
      induced_quotient_action(a, VertexPartition::from_blocks(4, bad)),
      doctest::Contains("NotInvariant"), error);
}

TEST_CASE("K always lands inside the induced kernel") {
  for (int n : {3, 4}) {
    auto d = decorated(n);
    for (const PermGroup& k :
         {d.swaps, d.action.group().with_generators({d.swaps.generators()[0]})}) {
      if (!is_normal_in(d.action.group(), k)) continue;
      auto p = imprimitivity_from_normal(d.action, k);
      auto iq = induced_quotient_action(d.action, p);
      CHECK(k.is_subgroup_of(iq.kernel));
    }
  }
}

TEST_CASE("orbit bound inequality |G_x.y| <= [G_x : K cap G_x] * max K-orbit") {
  for (int n : {3, 4}) {
    auto d = decorated(n);
    auto& g = d.action.group();
    long long max_k_orbit = 0;
    auto kp = d.action.vertex_orbit_partition(d.swaps);
    for (const auto& b : kp.blocks)
      max_k_orbit = std::max(max_k_orbit, (long long)b.size());
    for (int x = 0; x < d.graph.num_vertices(); ++x) {
      PermGroup gx = d.action.vertex_stabilizer(x);
      PermGroup kx = subgroup_intersection(g, d.swaps, gx);
      long long lhs_bound = (gx.order() / kx.order()) * max_k_orbit;
      for (int y = 0; y < d.graph.num_vertices(); ++y)
        CHECK((long long)d.action.vertex_orbit(gx, y).size() <= lhs_bound);
    }
  }
}

TEST_CASE("action kernels are normal and act trivially") {
  auto d = decorated(4);
  auto p = imprimitivity_from_normal(d.action, d.swaps);
  auto iq = induced_quotient_action(d.action, p);
  CHECK(is_normal_in(d.action.group(), iq.kernel));
  for (const auto& k : iq.kernel.generators()) {
    CHECK(perm_is_identity(iq.action.vertex_action(k)));
    CHECK(perm_is_identity(iq.action.dart_action(k)));
  }
}

TEST_CASE("a trivial action of a nontrivial group has the whole group as kernel") {
  SerreGraph t = cycle(3);
  PermGroup g({"a", "b", "c"}, {Perm{1, 2, 0}});
  std::vector<Perm> idv(1, perm_identity(t.num_vertices()));
  std::vector<Perm> idd(1, perm_identity(t.num_darts()));
  GroupAction a(g, t, idv, idd);
  CHECK(action_kernel(a).order() == g.order());
  CHECK_FALSE(a.is_faithful());
}

TEST_CASE("generator assignments that are not homomorphisms are rejected") {
  // Z/2 sent to an order-3 rotation: each generator image is an
  // automorphism, but the assignment cannot extend to a homomorphism
  SerreGraph t = cycle(3);
  PermGroup z2({"a", "b"}, {Perm{1, 0}});
  std::vector<int> vrot(3), drot(6);
  for (int i = 0; i < 3; ++i)
    vrot[t.vertex_index("c" + std::to_string(i))] =
        t.vertex_index("c" + std::to_string((i + 1) % 3));
  for (int i = 0; i < 3; ++i) {
    int d = t.dart_index("ce" + std::to_string(i));
    int img = t.dart_index("ce" + std::to_string((i + 1) % 3));
    drot[d] = img;
    drot[t.bar(d)] = t.bar(img);
  }
  GroupAction a(z2, t, {vrot}, {drot});
  CHECK_THROWS_WITH_AS(a.kernel(), doctest::Contains("NotAHomomorphism"), error);
}
