#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "serre/gos.hpp"
#include "serre/voltage.hpp"

using namespace serre;
using namespace testutil;

namespace {

SerreGraph point_graph(const std::string& id = "pt") {
  GraphBuilder b;
  b.add_vertex(id);
  return b.build();
}

GraphOfSpaces gos_points(const SerreGraph& lambda) {
  std::vector<SerreGraph> vs(lambda.num_vertices(), point_graph());
  std::vector<SerreGraph> es(lambda.num_geometric_edges(), point_graph());
  std::vector<std::vector<int>> av(lambda.num_darts(), std::vector<int>{0});
  std::vector<std::vector<int>> ad(lambda.num_darts());
  return GraphOfSpaces::validate(lambda, vs, es, av, ad);
}

GoSMorphism points_morphism(const GraphOfSpaces& src, const GraphOfSpaces& dst,
                            const GraphMorphism& f) {
  std::vector<std::vector<int>> vv(src.underlying().num_vertices(),
                                   std::vector<int>{0});
  std::vector<std::vector<int>> vd(src.underlying().num_vertices());
  std::vector<std::vector<int>> ev(src.num_edge_spaces(), std::vector<int>{0});
  std::vector<std::vector<int>> ed(src.num_edge_spaces());
  return GoSMorphism::validate(src, dst, f.vmap, f.dmap, vv, vd, ev, ed);
}

// 6-cycle wrapping onto the 3-cycle
GraphMorphism wrap_c6_c3() {
  SerreGraph c6 = cycle(6), c3 = cycle(3);
  std::vector<int> vm(6), dm(12);
  for (int i = 0; i < 6; ++i)
    vm[c6.vertex_index("c" + std::to_string(i))] =
        c3.vertex_index("c" + std::to_string(i % 3));
  for (int i = 0; i < 6; ++i) {
    int d6 = c6.dart_index("ce" + std::to_string(i));
    int d3 = c3.dart_index("ce" + std::to_string(i % 3));
    dm[d6] = d3;
    dm[c6.bar(d6)] = c3.bar(d3);
  }
  return GraphMorphism::validate(c6, c3, vm, dm);
}

// 2n-cycle over the banana: even darts traverse e0 forward, odd darts
// traverse e1 backward
GraphMorphism wrap_cycle_banana(int n2) {
  SerreGraph c = cycle(n2);
  SerreGraph b = banana(2);
  std::vector<int> vm(n2), dm(2 * n2);
  for (int i = 0; i < n2; ++i)
    vm[c.vertex_index("c" + std::to_string(i))] =
        b.vertex_index(i % 2 == 0 ? "u" : "v");
  for (int i = 0; i < n2; ++i) {
    int d = c.dart_index("ce" + std::to_string(i));
    int target = i % 2 == 0 ? b.dart_index("e0") : b.bar(b.dart_index("e1"));
    dm[d] = target;
    dm[c.bar(d)] = b.bar(target);
  }
  return GraphMorphism::validate(c, b, vm, dm);
}

}  // namespace

TEST_CASE("total space: one edge with point pieces is a 2-path") {
  auto y = gos_points(path(1));
  auto t = total_space(y);
  CHECK(is_isomorphic(t.graph, path(2)));
}

TEST_CASE("total space: 3-cycle vertex spaces joined through a point edge space") {
  SerreGraph lambda = path(1);
  std::vector<SerreGraph> vs{cycle(3, "a"), cycle(3, "b")};
  std::vector<SerreGraph> es{point_graph()};
  std::vector<std::vector<int>> av(lambda.num_darts(), std::vector<int>{0});
  std::vector<std::vector<int>> ad(lambda.num_darts());
  auto y = GraphOfSpaces::validate(lambda, vs, es, av, ad);
  auto t = total_space(y);
  CHECK(t.graph.num_vertices() == 7);
  CHECK(t.graph.num_geometric_edges() == 8);
  GraphBuilder expect;
  for (int i = 0; i < 3; ++i) expect.add_vertex("x" + std::to_string(i));
  for (int i = 0; i < 3; ++i) expect.add_vertex("y" + std::to_string(i));
  expect.add_vertex("mid");
  for (int i = 0; i < 3; ++i) {
    expect.add_edge("x" + std::to_string(i), "x" + std::to_string((i + 1) % 3),
                    "ex" + std::to_string(i));
    expect.add_edge("y" + std::to_string(i), "y" + std::to_string((i + 1) % 3),
                    "ey" + std::to_string(i));
  }
  expect.add_edge("x0", "mid", "r0");
  expect.add_edge("mid", "y0", "r1");
  CHECK(is_isomorphic(t.graph, expect.build()));
}

TEST_CASE("total space: loop with point pieces is a 2-cycle") {
  auto y = gos_points(loop_graph());
  auto t = total_space(y);
  CHECK(is_isomorphic(t.graph, cycle(2)));
}

TEST_CASE("total space vertex count is the sum of the piece sizes") {
  for (auto lambda : {cycle(3), star(3), banana(2)}) {
    auto y = gos_points(lambda);
    auto t = total_space(y);
    CHECK(t.graph.num_vertices() ==
          lambda.num_vertices() + lambda.num_geometric_edges());
  }
}

TEST_CASE("fiber product: 6-cycle x 6-cycle over the 3-cycle") {
  auto f = wrap_c6_c3();
  auto fp = fiber_product(f, f);
  CHECK(fp.graph.num_vertices() == 12);
  REQUIRE(fp.components.size() == 2);
  for (auto& comp : fp.split()) {
    CHECK(is_isomorphic(comp.graph, cycle(6)));
    CHECK(is_covering(comp.proj1).covering);
    CHECK(is_covering(comp.proj2).covering);
  }
}

TEST_CASE("fiber product with the identity recovers the source") {
  auto f = wrap_c6_c3();
  auto fp = fiber_product(GraphMorphism::identity(f.target), f);
  CHECK(is_isomorphic(fp.graph, f.source));
}

TEST_CASE("fiber product: alternating 4- and 6-cycles over the banana give a 12-cycle") {
  auto f1 = wrap_cycle_banana(4);
  auto f2 = wrap_cycle_banana(6);
  REQUIRE(is_covering(f1).covering);
  REQUIRE(is_covering(f2).covering);
  auto fp = fiber_product(f1, f2);
  REQUIRE(fp.components.size() == 1);
  CHECK(is_isomorphic(fp.graph, cycle(12)));
}

TEST_CASE("fiber product diagram verification") {
  auto f = wrap_c6_c3();
  auto fp = fiber_product(f, f);
  auto rep = is_fiber_product_diagram(fp.proj1, fp.proj2, f, f);
  CHECK(rep.ok);

  // deleting a corner component breaks existence
  auto comps = fp.split();
  auto bad = is_fiber_product_diagram(comps[0].proj1, comps[0].proj2, f, f);
  CHECK_FALSE(bad.ok);
  CHECK(bad.witness.find("no corner point") != std::string::npos);

  // duplicating a component breaks uniqueness
  SerreGraph doubled = disjoint_union(fp.graph, comps[0].graph, "A", "B");
  std::vector<int> v1(doubled.num_vertices()), v2(doubled.num_vertices());
  std::vector<int> d1(doubled.num_darts()), d2(doubled.num_darts());
  for (int v = 0; v < doubled.num_vertices(); ++v) {
    const std::string& id = doubled.vertex_id(v);
    if (id[0] == 'A') {
      int old = fp.graph.vertex_index(id.substr(1));
      v1[v] = fp.proj1.vmap[old];
      v2[v] = fp.proj2.vmap[old];
    } else {
      int old = comps[0].graph.vertex_index(id.substr(1));
      v1[v] = comps[0].proj1.vmap[old];
      v2[v] = comps[0].proj2.vmap[old];
    }
  }
  for (int d = 0; d < doubled.num_darts(); ++d) {
    const std::string& id = doubled.dart_id(d);
    if (id[0] == 'A') {
      int old = fp.graph.dart_index(id.substr(1));
      d1[d] = fp.proj1.dmap[old];
      d2[d] = fp.proj2.dmap[old];
    } else {
      int old = comps[0].graph.dart_index(id.substr(1));
      d1[d] = comps[0].proj1.dmap[old];
      d2[d] = comps[0].proj2.dmap[old];
    }
  }
  auto p1 = GraphMorphism::validate(doubled, f.source, v1, d1);
  auto p2 = GraphMorphism::validate(doubled, f.source, v2, d2);
  auto dup = is_fiber_product_diagram(p1, p2, f, f);
  CHECK_FALSE(dup.ok);
  CHECK(dup.witness.find("not unique") != std::string::npos);
}

TEST_CASE("gos covering: identity") {
  auto y = gos_points(cycle(3));
  auto rep = check_gos_covering(GoSMorphism::identity(y));
  CHECK(rep.covering);
  CHECK(rep.degree == 1);
}

TEST_CASE("gos covering: double cover of a loop with point pieces") {
  SerreGraph loop = loop_graph();
  SerreGraph c2 = cycle(2);
  auto base = gos_points(loop);
  auto up = gos_points(c2);
  std::vector<int> vm(2, 0), dm(4);
  int e = loop.dart_index("e");
  dm[c2.dart_index("ce0")] = e;
  dm[c2.bar(c2.dart_index("ce0"))] = loop.bar(e);
  dm[c2.dart_index("ce1")] = e;
  dm[c2.bar(c2.dart_index("ce1"))] = loop.bar(e);
  auto f = points_morphism(up, base, GraphMorphism::validate(c2, loop, vm, dm));
  auto rep = check_gos_covering(f);
  CHECK(rep.covering);
  CHECK(rep.degree == 2);
}

TEST_CASE("gos covering: dropped elevation is an existence failure") {
  SerreGraph loop = loop_graph();
  SerreGraph e1 = path(1);
  auto base = gos_points(loop);
  auto up = gos_points(e1);
  int e = loop.dart_index("e");
  std::vector<int> vm(2, 0), dm(2);
  dm[e1.dart_index("pe0")] = e;
  dm[e1.bar(e1.dart_index("pe0"))] = loop.bar(e);
  auto f = points_morphism(up, base, GraphMorphism::validate(e1, loop, vm, dm));
  auto rep = check_gos_covering(f);
  CHECK_FALSE(rep.covering);
  CHECK(rep.witness.find("lifts") != std::string::npos);
}

TEST_CASE("gos covering implies the total-space map is a covering") {
  auto base = gos_points(cycle(3));
  auto up = gos_points(cycle(6));
  auto f = points_morphism(up, base, wrap_c6_c3());
  auto rep = check_gos_covering(f);
  CHECK(rep.covering);
  auto st = total_space(up);
  auto tt = total_space(base);
  CHECK(is_covering(f.total_map(st, tt)).covering);
}

TEST_CASE("gos automorphisms: flip between isomorphic vertex spaces") {
  SerreGraph lambda = path(1);
  std::vector<SerreGraph> vs{cycle(3, "a"), cycle(3, "b")};
  std::vector<SerreGraph> es{point_graph()};
  std::vector<std::vector<int>> av(lambda.num_darts(), std::vector<int>{0});
  std::vector<std::vector<int>> ad(lambda.num_darts());
  auto y = GraphOfSpaces::validate(lambda, vs, es, av, ad);
  auto autos = gos_automorphisms(y);
  bool has_flip = false, has_identity = false;
  for (const auto& h : autos) {
    if (h.uvmap[0] == 1) has_flip = true;
    if (h.uvmap == std::vector<int>{0, 1}) has_identity = true;
  }
  CHECK(has_flip);
  CHECK(has_identity);
}

TEST_CASE("gos automorphisms: non-isomorphic vertex spaces admit no flip") {
  SerreGraph lambda = path(1);
  std::vector<SerreGraph> vs{cycle(3, "a"), cycle(4, "b")};
  std::vector<SerreGraph> es{point_graph()};
  std::vector<std::vector<int>> av(lambda.num_darts(), std::vector<int>{0});
  std::vector<std::vector<int>> ad(lambda.num_darts());
  auto y = GraphOfSpaces::validate(lambda, vs, es, av, ad);
  auto autos = gos_automorphisms(y);
  CHECK_FALSE(autos.empty());
  for (const auto& h : autos) CHECK(h.uvmap[0] == 0);
}

TEST_CASE("quotient by the trivial group is the identity") {
  auto y = gos_points(cycle(3));
  auto q = quotient_gos(y, {});
  CHECK(q.group_order == 1);
  auto rep = check_gos_covering(q.projection);
  CHECK(rep.covering);
  CHECK(rep.degree == 1);
}

TEST_CASE("quotient: deck action of the loop double cover recovers the base") {
  SerreGraph c2 = cycle(2);
  auto up = gos_points(c2);
  std::vector<int> uv{1, 0};
  std::vector<int> ud(4);
  int e0 = c2.dart_index("ce0"), e1 = c2.dart_index("ce1");
  ud[e0] = e1;
  ud[e1] = e0;
  ud[c2.bar(e0)] = c2.bar(e1);
  ud[c2.bar(e1)] = c2.bar(e0);
  std::vector<std::vector<int>> vv(2, std::vector<int>{0}), vd(2);
  std::vector<std::vector<int>> ev(2, std::vector<int>{0}), ed(2);
  auto rot = GoSMorphism::validate(up, up, uv, ud, vv, vd, ev, ed);
  auto q = quotient_gos(up, {rot});
  CHECK(q.group_order == 2);
  CHECK(is_isomorphic(q.quotient.underlying(), loop_graph()));
  auto rep = check_gos_covering(q.projection);
  CHECK(rep.covering);
  CHECK(rep.degree == 2);
}

TEST_CASE("quotient: rotation of the 3-cycle gives a single loop") {
  auto y = gos_points(cycle(3));
  SerreGraph c3 = cycle(3);
  std::vector<int> uv{1, 2, 0};
  std::vector<int> ud(6);
  for (int i = 0; i < 3; ++i) {
    int d = c3.dart_index("ce" + std::to_string(i));
    int t = c3.dart_index("ce" + std::to_string((i + 1) % 3));
    ud[d] = t;
    ud[c3.bar(d)] = c3.bar(t);
  }
  std::vector<std::vector<int>> vv(3, std::vector<int>{0}), vd(3);
  std::vector<std::vector<int>> ev(3, std::vector<int>{0}), ed(3);
  auto rot = GoSMorphism::validate(y, y, uv, ud, vv, vd, ev, ed);
  auto q = quotient_gos(y, {rot});
  CHECK(q.group_order == 3);
  CHECK(is_isomorphic(q.quotient.underlying(), loop_graph()));
  auto rep = check_gos_covering(q.projection);
  CHECK(rep.covering);
  CHECK(rep.degree == 3);
}

TEST_CASE("quotient rejects actions with fixed points or inversions") {
  SerreGraph lambda = path(1);
  std::vector<SerreGraph> vs{cycle(2, "a"), point_graph("b")};
  std::vector<SerreGraph> es{point_graph()};
  std::vector<std::vector<int>> av(lambda.num_darts(), std::vector<int>{0});
  std::vector<std::vector<int>> ad(lambda.num_darts());
  auto y = GraphOfSpaces::validate(lambda, vs, es, av, ad);
  SerreGraph c2 = cycle(2, "a");
  std::vector<int> uv{0, 1}, ud{0, 1};
  std::vector<std::vector<int>> vv{{0, 1}, {0}};
  std::vector<std::vector<int>> vd{std::vector<int>(4), {}};
  // the reflection fixing both vertices swaps the parallel edges, matching
  // orientations: ae0 <-> ae1'
  int d0 = c2.dart_index("ae0"), d1 = c2.dart_index("ae1");
  vd[0][d0] = c2.bar(d1);
  vd[0][c2.bar(d1)] = d0;
  vd[0][d1] = c2.bar(d0);
  vd[0][c2.bar(d0)] = d1;
  std::vector<std::vector<int>> ev{{0}}, ed{{}};
  auto refl = GoSMorphism::validate(y, y, uv, ud, vv, vd, ev, ed);
  CHECK_THROWS_WITH_AS(quotient_gos(y, {refl}), doctest::Contains("NotFree"), error);

  auto yp = gos_points(path(1));
  std::vector<int> fuv{1, 0}, fud{1, 0};
  std::vector<std::vector<int>> fvv(2, std::vector<int>{0}), fvd(2);
  std::vector<std::vector<int>> fev(1, std::vector<int>{0}), fed(1);
  auto flip = GoSMorphism::validate(yp, yp, fuv, fud, fvv, fvd, fev, fed);
  CHECK_THROWS_WITH_AS(quotient_gos(yp, {flip}), doctest::Contains("EdgeInversion"),
                       error);
}

TEST_CASE("deck group: 6-cycle over 3-cycle is Z/2 and regular") {
  auto base = gos_points(cycle(3));
  auto up = gos_points(cycle(6));
  auto f = points_morphism(up, base, wrap_c6_c3());
  auto deck = deck_group(f);
  CHECK(deck.elements.size() == 2);
  CHECK(deck.regular);
}

TEST_CASE("deck group: irregular 3-fold cover of the wedge of two loops") {
  SerreGraph w = wedge_of_loops(2);
  std::map<int, Perm> volt;
  volt[w.rep(w.dart_index("l0"))] = Perm{1, 0, 2};
  volt[w.rep(w.dart_index("l1"))] = Perm{2, 1, 0};
  auto vc = voltage_cover(w, 3, volt);
  REQUIRE(vc.graph.is_connected());
  REQUIRE(is_covering(vc.projection).covering);
  auto base = gos_points(w);
  auto up = gos_points(vc.graph);
  auto f = points_morphism(up, base, vc.projection);
  auto deck = deck_group(f);
  CHECK(deck.elements.size() == 1);
  CHECK_FALSE(deck.regular);
}

TEST_CASE("deck group of the identity covering is trivial and regular") {
  auto y = gos_points(star(3));
  auto deck = deck_group(GoSMorphism::identity(y));
  CHECK(deck.elements.size() == 1);
  CHECK(deck.regular);
}

TEST_CASE("quotient coverings have regular deck groups of full order") {
  auto y = gos_points(cycle(6));
  SerreGraph c6 = cycle(6);
  std::vector<int> uv(6), ud(12);
  for (int i = 0; i < 6; ++i)
    uv[c6.vertex_index("c" + std::to_string(i))] =
        c6.vertex_index("c" + std::to_string((i + 2) % 6));
  for (int i = 0; i < 6; ++i) {
    int d = c6.dart_index("ce" + std::to_string(i));
    int t = c6.dart_index("ce" + std::to_string((i + 2) % 6));
    ud[d] = t;
    ud[c6.bar(d)] = c6.bar(t);
  }
  std::vector<std::vector<int>> vv(6, std::vector<int>{0}), vd(6);
  std::vector<std::vector<int>> ev(6, std::vector<int>{0}), ed(6);
  auto rot2 = GoSMorphism::validate(y, y, uv, ud, vv, vd, ev, ed);
  auto q = quotient_gos(y, {rot2});
  auto rep = check_gos_covering(q.projection);
  REQUIRE(rep.covering);
  CHECK(rep.degree == q.group_order);
  auto deck = deck_group(q.projection);
  CHECK((long long)deck.elements.size() == q.group_order);
  CHECK(deck.regular);
}

TEST_CASE("components of pullbacks along voltage coverings are coverings") {
  std::mt19937 rng(11);
  int done = 0;
  for (int trial = 0; trial < 300 && done < 100; ++trial) {
    SerreGraph base = random_connected(rng, 2 + (int)(rng() % 4), (int)(rng() % 3));
    int deg = 2 + (int)(rng() % 3);
    std::map<int, Perm> volt;
    for (int e : spanning_tree(base).extra_reps) {
      Perm p = perm_identity(deg);
      for (int k = deg - 1; k > 0; --k) std::swap(p[k], p[rng() % (k + 1)]);
      volt[e] = p;
    }
    auto vc = voltage_cover(base, deg, volt);
    // f1: a random walk morphism from a path
    int len = 1 + (int)(rng() % 5);
    std::vector<int> walk;
    int at = (int)(rng() % base.num_vertices());
    for (int k = 0; k < len; ++k) {
      const auto& lk = base.link(at);
      if (lk.empty()) break;
      int e = lk[rng() % lk.size()];  // dart into `at`
      walk.push_back(base.bar(e));    // leave `at`
      at = base.tau(base.bar(e));
    }
    if (walk.empty()) continue;
    SerreGraph p = path((int)walk.size());
    std::vector<int> vm(p.num_vertices()), dm(p.num_darts());
    vm[p.vertex_index("p0")] = base.iota(walk[0]);
    for (size_t k = 0; k < walk.size(); ++k) {
      vm[p.vertex_index("p" + std::to_string(k + 1))] = base.tau(walk[k]);
      int d = p.dart_index("pe" + std::to_string(k));
      dm[d] = walk[k];
      dm[p.bar(d)] = base.bar(walk[k]);
    }
    auto f1 = GraphMorphism::validate(p, base, vm, dm);
    auto fp = fiber_product(f1, vc.projection);
    for (auto& comp : fp.split()) CHECK(is_covering(comp.proj1).covering);
    ++done;
  }
  CHECK(done == 100);
}

TEST_CASE("quotient with nontrivial underlying-vertex stabilizers") {
  // swap the two parallel underlying edges while rotating both 2-cycle
  // pieces; underlying vertices stay fixed, so the piece quotients carry
  // the whole action
  SerreGraph lambda = cycle(2, "L");
  SerreGraph piece = cycle(2, "m");
  SerreGraph pt = point_graph();
  int l0 = lambda.dart_index("Le0"), l1 = lambda.dart_index("Le1");
  std::vector<std::vector<int>> av(lambda.num_darts()), ad(lambda.num_darts());
  // attach the e0 sides at m0 and the e1 sides at m1 of each endpoint piece
  av[l0] = {piece.vertex_index("m0")};
  av[lambda.bar(l0)] = {piece.vertex_index("m0")};
  av[l1] = {piece.vertex_index("m1")};
  av[lambda.bar(l1)] = {piece.vertex_index("m1")};
  auto y = GraphOfSpaces::validate(lambda, {piece, piece}, {pt, pt}, av, ad);

  std::vector<int> uv{0, 1};
  std::vector<int> ud(4);
  // Le0 and Le1 run in opposite directions; the vertex-fixing swap pairs
  // each with the other's reverse
  ud[l0] = lambda.bar(l1);
  ud[lambda.bar(l1)] = l0;
  ud[l1] = lambda.bar(l0);
  ud[lambda.bar(l0)] = l1;
  Perm rotv(2), rotd(4);
  rotv[piece.vertex_index("m0")] = piece.vertex_index("m1");
  rotv[piece.vertex_index("m1")] = piece.vertex_index("m0");
  int p0 = piece.dart_index("me0"), p1 = piece.dart_index("me1");
  rotd[p0] = p1;
  rotd[p1] = p0;
  rotd[piece.bar(p0)] = piece.bar(p1);
  rotd[piece.bar(p1)] = piece.bar(p0);
  std::vector<std::vector<int>> vv{rotv, rotv}, vd{rotd, rotd};
  std::vector<std::vector<int>> ev{{0}, {0}}, ed{{}, {}};
  auto sigma = GoSMorphism::validate(y, y, uv, ud, vv, vd, ev, ed);
  auto q = quotient_gos(y, {sigma});
  CHECK(q.group_order == 2);
  CHECK(is_isomorphic(q.quotient.underlying(), path(1)));
  CHECK(is_isomorphic(q.quotient.vertex_space(0), loop_graph()));
  auto rep = check_gos_covering(q.projection);
  CHECK(rep.covering);
  CHECK(rep.degree == 2);
}
