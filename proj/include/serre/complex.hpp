#pragma once
// Small-loop 2-complexes over Serre graphs and integer homology via Smith
// normal form.  H1 = 0 is the implemented certificate for simple
// connectivity; full pi_1 triviality is out of reach.

#include <cstdint>
#include <functional>
#include <numeric>

#include "serre/core.hpp"

namespace serre {

struct TwoComplex {
  SerreGraph skeleton;
  std::vector<std::vector<int>> cells;  // each a closed dart walk

  static TwoComplex validate(SerreGraph skeleton,
                             std::vector<std::vector<int>> cells) {
    for (const auto& w : cells) {
      if (w.empty()) throw error(errc::invalid_argument, "empty cell walk");
      for (size_t i = 0; i < w.size(); ++i) {
        int e = w[i], f = w[(i + 1) % w.size()];
        if (e < 0 || e >= skeleton.num_darts())
          throw error(errc::dangling_reference, "cell references missing dart");
        if (skeleton.tau(e) != skeleton.iota(f))
          throw error(errc::invalid_argument, "cell walk does not compose");
      }
    }
    TwoComplex c;
    c.skeleton = std::move(skeleton);
    c.cells = std::move(cells);
    return c;
  }
};

namespace detail {

// Canonical key of a closed walk up to rotation, reversal and basepoint.
inline std::vector<int> walk_canonical(const SerreGraph& g,
                                       const std::vector<int>& w) {
  std::vector<int> best;
  auto consider = [&](const std::vector<int>& cand) {
    for (size_t r = 0; r < cand.size(); ++r) {
      std::vector<int> rot(cand.begin() + r, cand.end());
      rot.insert(rot.end(), cand.begin(), cand.begin() + r);
      if (best.empty() || rot < best) best = std::move(rot);
    }
  };
  consider(w);
  std::vector<int> rev(w.rbegin(), w.rend());
  for (int& d : rev) d = g.bar(d);
  consider(rev);
  return best;
}

}  // namespace detail

// All closed edge walks of length <= M without immediate backtracking
// (cyclically), one cell per equivalence class under rotation + reversal +
// basepoint.  Walks through a dart and straight back are null-homotopic and
// excluded.
inline TwoComplex attach_small_loops(const SerreGraph& g, int M) {
  if (!g.is_connected())
    throw error(errc::not_connected, "attach_small_loops needs a connected graph");
  if (M < 0) throw error(errc::invalid_argument, "M must be nonnegative");
  std::set<std::vector<int>> canon;
  std::vector<int> walk;
  auto closes = [&](int first, int last) {
    return g.tau(last) == g.iota(first) && g.bar(last) != first;
  };
  std::function<void(int)> extend = [&](int budget) {
    int last = walk.back();
    if (closes(walk.front(), last))
      canon.insert(detail::walk_canonical(g, walk));
    if (budget == 0) return;
    for (int e : g.link(g.tau(last))) {
      // link(v) holds darts INTO v; continue along their reverses
      int nxt = g.bar(e);
      if (nxt == g.bar(last)) continue;  // immediate backtrack
      walk.push_back(nxt);
      extend(budget - 1);
      walk.pop_back();
    }
  };
  for (int d = 0; d < g.num_darts(); ++d) {
    walk.assign(1, d);
    extend(M - 1);
  }
  return TwoComplex::validate(
      g, std::vector<std::vector<int>>(canon.begin(), canon.end()));
}

// ---------------------------------------------------------------------------
// Integer Smith normal form.  D = L*A*R with L, R unimodular and D diagonal
// with d1 | d2 | ... ; only the diagonal is needed here.

struct SmithResult {
  std::vector<long long> diagonal;  // nonzero entries, each dividing the next
  int rank() const { return (int)diagonal.size(); }
};

inline SmithResult smith_normal_form(std::vector<std::vector<long long>> a) {
  SmithResult out;
  int m = (int)a.size();
  int n = m == 0 ? 0 : (int)a[0].size();
  int s = 0;
  auto swap_rows = [&](int i, int j) { std::swap(a[i], a[j]); };
  auto swap_cols = [&](int i, int j) {
    for (int r = 0; r < m; ++r) std::swap(a[r][i], a[r][j]);
  };
  while (s < m && s < n) {
    // locate a minimal nonzero entry in the lower-right block
    int pi = -1, pj = -1;
    long long best = 0;
    for (int i = s; i < m; ++i)
      for (int j = s; j < n; ++j)
        if (a[i][j] != 0 &&
            (pi < 0 || std::llabs(a[i][j]) < best)) {
          best = std::llabs(a[i][j]);
          pi = i;
          pj = j;
        }
    if (pi < 0) break;
    swap_rows(s, pi);
    swap_cols(s, pj);
    bool clean = true;
    for (int i = s + 1; i < m; ++i)
      if (a[i][s] != 0) {
        long long q = a[i][s] / a[s][s];
        for (int j = s; j < n; ++j) a[i][j] -= q * a[s][j];
        if (a[i][s] != 0) clean = false;
      }
    for (int j = s + 1; j < n; ++j)
      if (a[s][j] != 0) {
        long long q = a[s][j] / a[s][s];
        for (int i = s; i < m; ++i) a[i][j] -= q * a[i][s];
        if (a[s][j] != 0) clean = false;
      }
    if (!clean) continue;  // smaller pivot now exists, repeat
    // divisibility: fold in any row holding an entry the pivot does not divide
    int bi = -1;
    for (int i = s + 1; i < m && bi < 0; ++i)
      for (int j = s + 1; j < n; ++j)
        if (a[i][j] % a[s][s] != 0) {
          bi = i;
          break;
        }
    if (bi >= 0) {
      for (int j = s; j < n; ++j) a[s][j] += a[bi][j];
      continue;
    }
    if (a[s][s] < 0)
      for (int j = s; j < n; ++j) a[s][j] = -a[s][j];
    ++s;
  }
  for (int i = 0; i < std::min(m, n); ++i)
    if (i < m && i < n && a[i][i] != 0) out.diagonal.push_back(a[i][i]);
  return out;
}

// ---------------------------------------------------------------------------
// H1 of a 2-complex with connected skeleton: kernel of the edge boundary
// modulo the image of the cell boundary, both over Z.

struct HomologyH1 {
  long long free_rank = 0;
  std::vector<long long> torsion;  // invariant factors > 1
};

inline HomologyH1 homology_h1(const TwoComplex& c) {
  const SerreGraph& g = c.skeleton;
  if (!g.is_connected())
    throw error(errc::not_connected, "homology_h1 needs a connected skeleton");
  auto reps = g.geometric_reps();
  std::map<int, int> repidx;
  for (int i = 0; i < (int)reps.size(); ++i) repidx[reps[i]] = i;
  const int E = (int)reps.size();
  const int V = g.num_vertices();

  // boundary of cells in the geometric edge basis
  std::vector<std::vector<long long>> d2(E, std::vector<long long>(c.cells.size(), 0));
  for (int j = 0; j < (int)c.cells.size(); ++j)
    for (int d : c.cells[j]) {
      int r = g.rep(d);
      d2[repidx[r]][j] += (d == r) ? 1 : -1;
    }

  // rank of the vertex boundary; for a connected skeleton this is V-1, but
  // compute it anyway
  std::vector<std::vector<long long>> d1(V, std::vector<long long>(E, 0));
  for (int i = 0; i < E; ++i) {
    int r = reps[i];
    d1[g.tau(r)][i] += 1;
    d1[g.iota(r)][i] -= 1;
  }
  int rank_d1 = smith_normal_form(d1).rank();

  auto snf = smith_normal_form(std::move(d2));
  HomologyH1 h;
  h.free_rank = (long long)E - rank_d1 - snf.rank();
  for (long long d : snf.diagonal)
    if (d > 1) h.torsion.push_back(d);
  return h;
}

}  // namespace serre
