#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hat_instances.hpp"
#include "helpers.hpp"
#include "serre/hat.hpp"
#include "serre/leighton.hpp"

using namespace serre;
using namespace testutil;

TEST_CASE("degree refinement: regular graphs have a single class") {
  for (auto g : {complete(4), complete_bipartite(3, 3), cycle(5)}) {
    auto p = degree_refinement(g);
    CHECK(p.num_vclasses == 1);
    CHECK(p.class_size[0] == g.num_vertices());
  }
  // K4 and K3,3 are both 3-regular: matching profiles
  CHECK(profiles_match(complete(4), nullptr, complete_bipartite(3, 3), nullptr));
}

TEST_CASE("degree refinement: 3-star has center and leaf classes") {
  auto p = degree_refinement(star(3));
  CHECK(p.num_vclasses == 2);
  std::multiset<long long> sizes(p.class_size.begin(), p.class_size.end());
  CHECK(sizes == std::multiset<long long>{1, 3});
  // transitions: the center sees 3 darts, a leaf sees 1
  std::multiset<int> totals;
  for (const auto& t : p.transitions) {
    int sum = 0;
    for (auto& [cls, cnt] : t) sum += cnt;
    totals.insert(sum);
  }
  CHECK(totals == std::multiset<int>{1, 3});
}

TEST_CASE("degree refinement: 2-path has end and middle classes") {
  auto p = degree_refinement(path(2));
  CHECK(p.num_vclasses == 2);
}

TEST_CASE("profiles: mismatch detection") {
  CHECK_FALSE(profiles_match(cycle(3), nullptr, star(3), nullptr));
  CHECK(profiles_match(cycle(4), nullptr, cycle(6), nullptr));
  // colorings can split otherwise-matching profiles
  Coloring c;
  c.vertex["c0"] = "special";
  CHECK_FALSE(profiles_match(cycle(4), &c, cycle(6), nullptr));
}

TEST_CASE("oracle: profile mismatch is a definitive none") {
  auto r = brute_force_common_cover(cycle(3), star(3), 4);
  CHECK_FALSE(r.has_value());
}

TEST_CASE("oracle: 4-cycle and 6-cycle meet at order 12") {
  auto r = brute_force_common_cover(cycle(4), cycle(6), 3);
  REQUIRE(r.has_value());
  CHECK(r->z.num_vertices() == 12);
  CHECK(is_covering(r->p1).degree == 3);
  CHECK(is_covering(r->p2).degree == 2);
}

TEST_CASE("oracle: identical inputs meet at degree 1") {
  SerreGraph g = decorated_cycle(3);
  auto r = brute_force_common_cover(g, g, 2);
  REQUIRE(r.has_value());
  CHECK(r->z.num_vertices() == g.num_vertices());
}

TEST_CASE("oracle: bound exhaustion is an explicit error") {
  // C4 and C6 have no common cover of degree 1 or 2 over C4
  CHECK_THROWS_WITH_AS(brute_force_common_cover(cycle(4), cycle(6), 2),
                       doctest::Contains("SearchBoundExceeded"), error);
}

TEST_CASE("common cover: identical graphs give the identity pair") {
  SerreGraph g = star(3);
  auto cc = common_cover_graphs(g, g);
  CHECK(cc.z.num_vertices() == g.num_vertices());
  CHECK(is_covering(cc.p1).covering);
  CHECK(is_covering(cc.p2).covering);
}

TEST_CASE("common cover: 4-cycle and 6-cycle give a 12-cycle") {
  auto cc = common_cover_graphs(cycle(4), cycle(6));
  CHECK(is_isomorphic(cc.z, cycle(12)));
  CHECK(is_covering(cc.p1).covering);
  CHECK(is_covering(cc.p2).covering);
  CHECK(cc.z.num_vertices() % 12 == 0);
}

TEST_CASE("common cover: profile mismatch raises NoCommonCover") {
  CHECK_THROWS_WITH_AS(common_cover_graphs(cycle(3), star(3)),
                       doctest::Contains("NoCommonCover"), error);
}

TEST_CASE("common cover: K4 and K3,3 via the colored tensor") {
  auto cc = common_cover_graphs(complete(4), complete_bipartite(3, 3));
  CHECK(is_covering(cc.p1).covering);
  CHECK(is_covering(cc.p2).covering);
  CHECK(cc.z.num_vertices() % 12 == 0);
  CHECK(cc.z.is_connected());
}

TEST_CASE("coverings preserve the stable profile") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    SerreGraph base = random_connected(rng, 2 + (int)(rng() % 4), 1 + (int)(rng() % 2));
    int deg = 2 + (int)(rng() % 3);
    std::map<int, Perm> volt;
    for (int e : spanning_tree(base).extra_reps) {
      Perm p = perm_identity(deg);
      for (int k = deg - 1; k > 0; --k) std::swap(p[k], p[rng() % (k + 1)]);
      volt[e] = p;
    }
    auto vc = voltage_cover(base, deg, volt);
    CHECK(covering_preserves_profile(vc.projection, nullptr, nullptr));
  }
}

TEST_CASE("decoration: equal and distinct stars") {
  // two vertices with isomorphic marked stars share a color
  auto y = two_cycle_gos(6, point_piece(), {0}, {0});
  auto dec = gos_decoration(y);
  CHECK(dec.coloring.vertex.at("p0") == dec.coloring.vertex.at("p1"));

  // stars differing in edge-space size get distinct colors
  GraphBuilder eb;
  eb.add_vertex("x0");
  eb.add_vertex("x1");
  eb.add_edge("x0", "x1", "xe");
  SerreGraph edge_piece = eb.build();
  auto y2 = two_cycle_gos(6, edge_piece, {0, 1}, {2, 3});
  auto dec2 = gos_decoration(y2);
  CHECK(dec2.coloring.vertex.at("p0") != dec.coloring.vertex.at("p0"));
}

TEST_CASE("decoration: interchangeable marked images are flagged") {
  // a loop whose two marked points are exchanged by a reflection
  SerreGraph lambda = wedge_of_loops(1);
  SerreGraph c3 = cycle(3, "c");
  std::vector<SerreGraph> vs{c3};
  std::vector<SerreGraph> es{point_piece()};
  std::vector<std::vector<int>> av(2), ad(2);
  int l0 = lambda.dart_index("l0");
  av[l0] = {c3.vertex_index("c0")};
  av[lambda.bar(l0)] = {c3.vertex_index("c1")};
  auto y = GraphOfSpaces::validate(lambda, vs, es, av, ad);
  auto dec = gos_decoration(y);
  CHECK_FALSE(dec.rigid);

  // the asymmetric base is rigid
  auto dec2 = gos_decoration(loop_base_gos());
  CHECK(dec2.rigid);
}

TEST_CASE("common gos cover: identical inputs") {
  auto base = loop_base_gos();
  auto y1 = loop_base_cover(base, 2);
  auto cc = common_cover_gos(y1.total, y1.total);
  CHECK(check_gos_covering(cc.p1).covering);
  CHECK(check_gos_covering(cc.p2).covering);
}

TEST_CASE("common gos cover: two voltage covers of a base") {
  auto base = loop_base_gos();
  auto y1 = loop_base_cover(base, 2);
  auto y2 = loop_base_cover(base, 3);
  REQUIRE(check_gos_covering(y1.projection).covering);
  REQUIRE(check_gos_covering(y2.projection).covering);
  auto cc = common_cover_gos(y1.total, y2.total);
  auto r1 = check_gos_covering(cc.p1);
  auto r2 = check_gos_covering(cc.p2);
  CHECK(r1.covering);
  CHECK(r2.covering);
  CHECK(cc.z.underlying().num_vertices() % 6 == 0);
}

TEST_CASE("common gos cover: ambiguous local symmetry is refused") {
  SerreGraph lambda = wedge_of_loops(1);
  SerreGraph c4 = cycle(4, "c");
  std::vector<SerreGraph> vs{c4};
  std::vector<SerreGraph> es{point_piece()};
  std::vector<std::vector<int>> av(2), ad(2);
  int l0 = lambda.dart_index("l0");
  av[l0] = {c4.vertex_index("c0")};
  av[lambda.bar(l0)] = {c4.vertex_index("c2")};
  auto y = GraphOfSpaces::validate(lambda, vs, es, av, ad);
  CHECK_THROWS_WITH_AS(common_cover_gos(y, y),
                       doctest::Contains("AmbiguousLocalSymmetry"), error);
}

TEST_CASE("common gos cover: incompatible decorations raise NoCommonCover") {
  auto y1 = loop_base_cover(loop_base_gos(), 2);
  // a second base with a longer path piece
  SerreGraph lambda = wedge_of_loops(1);
  GraphBuilder pb;
  for (int i = 0; i < 5; ++i) pb.add_vertex("q" + std::to_string(i));
  for (int i = 0; i < 4; ++i)
    pb.add_edge("q" + std::to_string(i), "q" + std::to_string(i + 1),
                "qe" + std::to_string(i));
  std::vector<SerreGraph> vs{pb.build()};
  std::vector<SerreGraph> es{point_piece()};
  std::vector<std::vector<int>> av(2), ad(2);
  int l0 = lambda.dart_index("l0");
  av[l0] = {vs[0].vertex_index("q0")};
  av[lambda.bar(l0)] = {vs[0].vertex_index("q1")};
  auto other = GraphOfSpaces::validate(lambda, vs, es, av, ad);
  auto y2 = loop_base_cover(other, 2);
  CHECK_THROWS_WITH_AS(common_cover_gos(y1.total, y2.total),
                       doctest::Contains("NoCommonCover"), error);
}

TEST_CASE("hat: trivial Qhat keeps the pieces") {
  auto data = hat_instance_simple6();
  // replace Qhat by the trivial subgroup: X-hat = X
  for (auto& g : data.qhat_v) g = g.with_generators({});
  auto glue = verify_and_glue_hat(data);
  CHECK(glue.passed());
  for (int v = 0; v < 2; ++v)
    CHECK(glue.hat_vertex[v].num_vertices() ==
          data.y.vertex_space(v).num_vertices());
}

TEST_CASE("hat: catalog instances pass and produce regular covers") {
  for (auto& [name, data] : hat_catalog()) {
    CAPTURE(name);
    auto glue = verify_and_glue_hat(data);
    CHECK(glue.passed());
    for (int v = 0; v < data.y.underlying().num_vertices(); ++v) {
      long long expect =
          data.gamma1_v[v].order() / data.qhat_v[v].order();
      CHECK(glue.deck1_order[v] == expect);
      CHECK(glue.deck2_order[v] ==
            data.gamma2_v[v].order() / data.qhat_v[v].order());
      CHECK(is_covering(glue.cover1[v]).degree == expect);
    }
  }
}

TEST_CASE("hat: the synthetic 6-cycle instance quotients to a 2-cycle") {
  auto glue = verify_and_glue_hat(hat_instance_simple6());
  CHECK(glue.passed());
  CHECK(is_isomorphic(glue.hat_vertex[0], cycle(2)));
  CHECK(is_covering(glue.cover1[0]).degree == 1);  // Qhat = Gamma here
}

TEST_CASE("hat: gluing mutations are caught by name") {
  CHECK_THROWS_WITH_AS(verify_and_glue_hat(hat_instance_paired(true, false)),
                       doctest::Contains("GluingMismatch"), error);
  CHECK_THROWS_WITH_AS(verify_and_glue_hat(hat_instance_paired(false, true)),
                       doctest::Contains("GluingMismatch"), error);
  auto checks = verify_hat_conditions(hat_instance_paired(true, false));
  bool glue_failed = false;
  for (const auto& c : checks)
    if (c.clause == "GluingCondition" && !c.ok) glue_failed = true;
  CHECK(glue_failed);
}

TEST_CASE("hat ball: radius 0 is the single quotient piece") {
  auto ball = assemble_hat_ball(hat_instance_simple6(), 0);
  CHECK(ball.ball.underlying().num_vertices() == 1);
  CHECK(is_isomorphic(ball.ball.vertex_space(0), cycle(2)));
  CHECK(ball.interior_ok);
}

TEST_CASE("hat ball: radius 1 star has one edge per Qhat orbit") {
  auto data = hat_instance_simple6();
  auto ball = assemble_hat_ball(data, 1);
  // D6-orbit of the marked vertex: 6 copies; rotation-of-order-3 orbits: 2
  CHECK(ball.ball.underlying().degree(0) == 2);
  CHECK(ball.ball.underlying().num_vertices() == 3);
  CHECK(ball.interior_ok);
  CHECK(ball.boundary.size() == 2);
}

TEST_CASE("hat ball: radius 2 interior passes the fiber-product checks") {
  auto data = hat_instance_deck2();
  auto ball = assemble_hat_ball(data, 2);
  CHECK(ball.interior_ok);
  int interior = 0;
  for (int d : ball.node_depth)
    if (d < 2) ++interior;
  CHECK((int)ball.interior_checks.size() == 2 * interior);
  // the covering degrees at the interior match the deck orders
  auto glue = verify_and_glue_hat(data);
  for (int i = 0; i < (int)ball.node_depth.size(); ++i)
    if (ball.node_depth[i] < 2)
      CHECK(is_covering(glue.cover1[ball.node_lambda[i]]).degree == 2);
}

TEST_CASE("oracle consistency: constructed covers are multiples of the minimum") {
  auto oracle = brute_force_common_cover(cycle(4), cycle(6), 3);
  REQUIRE(oracle.has_value());
  auto cc = common_cover_graphs(cycle(4), cycle(6));
  CHECK(cc.z.num_vertices() % oracle->z.num_vertices() == 0);
}
