#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "serre/complex.hpp"

using namespace serre;
using namespace testutil;

namespace {

// Test-only oracle: free rank of an integer matrix kernel via fraction-free
// Gaussian elimination over Q, independent of the Smith-normal-form path.
int rational_rank(std::vector<std::vector<long long>> a) {
  int m = (int)a.size();
  if (m == 0) return 0;
  int n = (int)a[0].size();
  int rank = 0;
  for (int col = 0; col < n && rank < m; ++col) {
    int piv = -1;
    for (int r = rank; r < m; ++r)
      if (a[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[rank], a[piv]);
    for (int r = 0; r < m; ++r) {
      if (r == rank || a[r][col] == 0) continue;
      long long p = a[rank][col], q = a[r][col];
      for (int cidx = 0; cidx < n; ++cidx)
        a[r][cidx] = a[r][cidx] * p - a[rank][cidx] * q;
    }
    ++rank;
  }
  return rank;
}

std::vector<std::vector<long long>> cell_boundary(const TwoComplex& c) {
  const SerreGraph& g = c.skeleton;
  auto reps = g.geometric_reps();
  std::map<int, int> idx;
  for (int i = 0; i < (int)reps.size(); ++i) idx[reps[i]] = i;
  std::vector<std::vector<long long>> m(reps.size(),
                                        std::vector<long long>(c.cells.size(), 0));
  for (int j = 0; j < (int)c.cells.size(); ++j)
    for (int d : c.cells[j]) m[idx[g.rep(d)]][j] += (d == g.rep(d)) ? 1 : -1;
  return m;
}

}  // namespace

TEST_CASE("smith normal form basics") {
  // gcd of entries is 2 and |det| = 8, so the invariant factors are 2, 4
  auto s = smith_normal_form({{2, 4}, {6, 8}});
  REQUIRE(s.diagonal.size() == 2);
  CHECK(s.diagonal[0] == 2);
  CHECK(s.diagonal[1] == 4);
  auto t = smith_normal_form({{1, 0}, {0, 0}});
  CHECK(t.diagonal == std::vector<long long>{1});
  auto u = smith_normal_form({{2}});
  CHECK(u.diagonal == std::vector<long long>{2});
  // each entry divides the next
  auto w = smith_normal_form({{6, 10}, {15, 4}});
  for (size_t i = 1; i < w.diagonal.size(); ++i)
    CHECK(w.diagonal[i] % w.diagonal[i - 1] == 0);
}

TEST_CASE("attach_small_loops: 3-cycle at M=3 yields one cell, H1 = 0") {
  auto c = attach_small_loops(cycle(3), 3);
  CHECK(c.cells.size() == 1);
  // independent oracle: kernel rank minus cell-boundary rank
  int edges = c.skeleton.num_geometric_edges();
  int kernel = edges - (c.skeleton.num_vertices() - 1);
  CHECK(kernel - rational_rank(cell_boundary(c)) == 0);
  auto h = homology_h1(c);
  CHECK(h.free_rank == 0);
  CHECK(h.torsion.empty());
}

TEST_CASE("attach_small_loops: 4-cycle at M=3 yields no cells, H1 rank 1") {
  auto c = attach_small_loops(cycle(4), 3);
  CHECK(c.cells.empty());
  auto h = homology_h1(c);
  CHECK(h.free_rank == 1);
  CHECK(h.torsion.empty());
}

TEST_CASE("attach_small_loops: theta graph at M=6 contains the three bigons, H1 = 0") {
  SerreGraph theta = banana(3);
  auto c = attach_small_loops(theta, 6);
  // the three bigon cells are present among the attached cells
  int bigons = 0;
  for (const auto& w : c.cells)
    if (w.size() == 2) ++bigons;
  CHECK(bigons == 3);
  // oracle: boundary matrix rank equals the cycle space rank (2), so H1 = 0
  int edges = theta.num_geometric_edges();
  int kernel = edges - (theta.num_vertices() - 1);
  CHECK(rational_rank(cell_boundary(c)) == kernel);
  auto h = homology_h1(c);
  CHECK(h.free_rank == 0);
  CHECK(h.torsion.empty());
}

TEST_CASE("attach_small_loops: cells have no immediate backtracking and dedup") {
  auto c = attach_small_loops(cycle(3), 6);
  for (const auto& w : c.cells)
    for (size_t i = 0; i < w.size(); ++i)
      CHECK(w[(i + 1) % w.size()] != c.skeleton.bar(w[i]));
  // the 3-cycle traversed once appears exactly once (not once per basepoint
  // or direction)
  int len3 = 0;
  for (const auto& w : c.cells)
    if (w.size() == 3) ++len3;
  CHECK(len3 == 1);
}

TEST_CASE("homology: n-cycle with no cells has rank 1") {
  for (int n : {3, 4, 5, 6}) {
    auto h = homology_h1(TwoComplex::validate(cycle(n), {}));
    CHECK(h.free_rank == 1);
    CHECK(h.torsion.empty());
  }
}

TEST_CASE("homology: disk (loop with a single-traversal cell) is trivial") {
  SerreGraph g = loop_graph();
  auto h = homology_h1(TwoComplex::validate(g, {{0}}));
  CHECK(h.free_rank == 0);
  CHECK(h.torsion.empty());
}

TEST_CASE("homology: loop traversed twice gives Z/2 torsion") {
  SerreGraph g = loop_graph();
  int e = g.dart_index("e");
  auto h = homology_h1(TwoComplex::validate(g, {{e, e}}));
  CHECK(h.free_rank == 0);
  REQUIRE(h.torsion.size() == 1);
  CHECK(h.torsion[0] == 2);
}

TEST_CASE("homology: skeleton with no cells has rank E - V + 1") {
  for (auto g : {complete(4), banana(3), wedge_of_loops(2), decorated_cycle(3)}) {
    auto h = homology_h1(TwoComplex::validate(g, {}));
    CHECK(h.free_rank == g.num_geometric_edges() - g.num_vertices() + 1);
  }
}

TEST_CASE("homology rejects a disconnected skeleton") {
  GraphBuilder b;
  b.add_vertex("a");
  b.add_vertex("b");
  CHECK_THROWS_WITH_AS(homology_h1(TwoComplex::validate(b.build(), {})),
                       doctest::Contains("NotConnected"), error);
}

TEST_CASE("two-complex validation rejects non-composable walks") {
  SerreGraph g = cycle(3);
  std::vector<std::vector<int>> cells{{0, 0}};  // tau(0) != iota(0) in a 3-cycle
  CHECK_THROWS_AS(TwoComplex::validate(g, cells), error);
}
