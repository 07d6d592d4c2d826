#pragma once
// Degree refinement and common finite covers of (decorated) graphs.  The
// construction strategy is layered: colored isomorphism, cycle alignment,
// proper-edge-coloring tensor for regular pairs, then an oracle-style
// voltage search.  Soundness rests entirely on post-verification: every
// candidate is re-checked by the covering verifier before it is returned.

#include <numeric>
#include <random>

#include "serre/gos.hpp"
#include "serre/voltage.hpp"

namespace serre {

// ---------------------------------------------------------------------------
// Degree refinement: iterated recoloring to a stable partition.  Two
// connected graphs admit a common universal cover iff their stable profiles
// match; the implemented test runs the refinement jointly on the disjoint
// union and asks that every class meet both sides.

struct RefinementProfile {
  std::vector<int> vclass;    // per vertex, stable class
  std::vector<int> dclass;    // per dart
  int num_vclasses = 0;
  int depth = 0;
  // per class: size and transition multiset (dart class -> count)
  std::vector<long long> class_size;
  std::vector<std::map<int, int>> transitions;
};

inline RefinementProfile degree_refinement(const SerreGraph& g,
                                           const Coloring* c = nullptr) {
  if (!g.is_connected())
    throw error(errc::not_connected, "degree refinement needs a connected graph");
  auto res = detail::resolve_colors({&g}, {c});
  auto r = detail::stable_refinement(g, res[0].vcol, res[0].dcol);
  RefinementProfile out;
  out.vclass = r.vclass;
  out.dclass = r.dclass;
  out.depth = r.rounds;
  out.num_vclasses =
      r.vclass.empty() ? 0 : 1 + *std::max_element(r.vclass.begin(), r.vclass.end());
  out.class_size.assign(out.num_vclasses, 0);
  out.transitions.assign(out.num_vclasses, {});
  for (int v = 0; v < g.num_vertices(); ++v) {
    ++out.class_size[r.vclass[v]];
    if (out.transitions[r.vclass[v]].empty())
      for (int e : g.link(v)) ++out.transitions[r.vclass[v]][r.dclass[e]];
  }
  return out;
}

inline bool profiles_match(const SerreGraph& g1, const Coloring* c1,
                           const SerreGraph& g2, const Coloring* c2) {
  if (!g1.is_connected() || !g2.is_connected())
    throw error(errc::not_connected, "profile matching needs connected graphs");
  auto jc = detail::joint_refinement(g1, c1, g2, c2);
  std::set<int> only1(jc.vclass1.begin(), jc.vclass1.end());
  std::set<int> only2(jc.vclass2.begin(), jc.vclass2.end());
  return only1 == only2;
}

// coverings preserve the stable classes: source vertices land in the class
// of their image under the joint refinement
inline bool covering_preserves_profile(const GraphMorphism& f, const Coloring* c1,
                                       const Coloring* c2) {
  auto jc = detail::joint_refinement(f.source, c1, f.target, c2);
  for (int v = 0; v < f.source.num_vertices(); ++v)
    if (jc.vclass1[v] != jc.vclass2[f.vmap[v]]) return false;
  for (int d = 0; d < f.source.num_darts(); ++d)
    if (jc.dclass1[d] != jc.dclass2[f.dmap[d]]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Common cover certificates.

struct CommonCover {
  SerreGraph z;
  GraphMorphism p1, p2;
  std::string strategy;
};

struct CommonCoverOptions {
  int max_degree = 6;
  long long budget = 60'000'000;  // voltage tuples examined before giving up
  Coloring c1, c2;
  bool colored = false;
};

namespace detail {

// lift of a coloring along a voltage cover (colors are constant on fibers)
inline Coloring lift_coloring(const SerreGraph& cover, const GraphMorphism& proj,
                              const Coloring& base, const SerreGraph& base_graph) {
  Coloring out;
  for (int v = 0; v < cover.num_vertices(); ++v)
    out.vertex[cover.vertex_id(v)] = base.vcolor(base_graph, proj.vmap[v]);
  for (int d = 0; d < cover.num_darts(); ++d)
    out.dart[cover.dart_id(d)] = base.dcolor(base_graph, proj.dmap[d]);
  return out;
}

// exhaustive search for a covering morphism g -> h (color-preserving when
// colorings are given); returns the first one in a deterministic order.
// Dart images must be injective on each link, never globally: a degree-d
// covering hits every target dart d times.
inline std::optional<GraphMorphism> find_covering_morphism(const SerreGraph& g,
                                                           const SerreGraph& h,
                                                           const Coloring* cg,
                                                           const Coloring* ch) {
  if (h.num_vertices() == 0 || g.num_vertices() == 0) return std::nullopt;
  auto jc = detail::joint_refinement(g, cg, h, ch);
  std::vector<int> order;
  {
    std::vector<char> seen(g.num_vertices(), 0);
    std::queue<int> q;
    seen[0] = 1;
    q.push(0);
    order.push_back(0);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e : g.link(v)) {
        int u = g.iota(e);
        if (!seen[u]) {
          seen[u] = 1;
          order.push_back(u);
          q.push(u);
        }
      }
    }
    if ((int)order.size() != g.num_vertices()) return std::nullopt;  // disconnected
  }
  std::vector<int> vmap(g.num_vertices(), -1), dmap(g.num_darts(), -1);

  // processes vertices in BFS order; vmap[order[k]] is always assigned by
  // the time position k is reached
  std::function<bool(size_t)> place_vertex = [&](size_t k) -> bool {
    if (k == order.size()) return true;
    int v = order[k];
    int w = vmap[v];
    const auto& lk = g.link(v);
    if ((int)lk.size() != h.degree(w)) return false;
    std::set<int> local_used;
    for (int e : lk)
      if (dmap[e] >= 0 && !local_used.insert(dmap[e]).second) return false;

    std::function<bool(size_t)> place_link = [&](size_t li) -> bool {
      if (li == lk.size()) return place_vertex(k + 1);
      int e = lk[li];
      if (dmap[e] >= 0) return place_link(li + 1);
      int u = g.iota(e);
      for (int fe : h.link(w)) {
        if (local_used.count(fe) || jc.dclass2[fe] != jc.dclass1[e]) continue;
        if (vmap[u] >= 0 && h.iota(fe) != vmap[u]) continue;
        if (e == g.bar(e)) continue;  // cannot happen; bar is fixed-point-free
        bool fresh_u = vmap[u] < 0;
        bool loop_like = g.iota(e) == v;  // loop at v: bar(e) is in this link too
        if (loop_like && local_used.count(h.bar(fe))) continue;
        vmap[u] = h.iota(fe);
        dmap[e] = fe;
        dmap[g.bar(e)] = h.bar(fe);
        local_used.insert(fe);
        if (loop_like) local_used.insert(h.bar(fe));
        if (place_link(li + 1)) return true;
        local_used.erase(fe);
        if (loop_like) local_used.erase(h.bar(fe));
        dmap[e] = -1;
        dmap[g.bar(e)] = -1;
        if (fresh_u) vmap[u] = -1;
      }
      return false;
    };
    return place_link(0);
  };

  for (int w0 = 0; w0 < h.num_vertices(); ++w0) {
    if (jc.vclass2[w0] != jc.vclass1[0]) continue;
    vmap.assign(g.num_vertices(), -1);
    dmap.assign(g.num_darts(), -1);
    vmap[0] = w0;
    if (place_vertex(0)) {
      auto f = GraphMorphism::validate(g, h, vmap, dmap);
      if (is_covering(f).covering) return f;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Brute-force oracle: enumerate connected covers of x1 by voltages over a
// spanning-tree complement (first voltage up to conjugacy), and test each
// for a covering onto x2 by exhaustive morphism search.  Returns the
// minimal-order success.  Profile mismatch is a definitive negative;
// exhausting the bound with matching profiles is an explicit error.

namespace detail {

inline std::vector<Perm> conjugacy_class_reps(int n) {
  // one permutation per cycle type
  std::vector<Perm> reps;
  std::vector<int> part;
  std::function<void(int, int)> gen = [&](int rest, int maxpart) {
    if (rest == 0) {
      Perm p = perm_identity(n);
      int at = 0;
      for (int len : part) {
        for (int i = 0; i < len; ++i) p[at + i] = at + (i + 1) % len;
        at += len;
      }
      reps.push_back(p);
      return;
    }
    for (int k = std::min(rest, maxpart); k >= 1; --k) {
      part.push_back(k);
      gen(rest - k, k);
      part.pop_back();
    }
  };
  gen(n, n);
  return reps;
}

inline std::vector<Perm> all_perms(int n) {
  std::vector<Perm> out;
  Perm p = perm_identity(n);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace detail

namespace detail {

inline bool is_bipartite(const SerreGraph& g) {
  std::vector<int> side(g.num_vertices(), -1);
  for (int s = 0; s < g.num_vertices(); ++s) {
    if (side[s] >= 0) continue;
    side[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e : g.link(v)) {
        int u = g.iota(e);
        if (side[u] < 0) {
          side[u] = 1 - side[v];
          q.push(u);
        } else if (side[u] == side[v]) {
          return false;
        }
      }
    }
  }
  return true;
}

// flat candidate scanner for voltage covers: connectivity and (optionally)
// bipartiteness without constructing a SerreGraph
struct VoltageScanner {
  int n, d;                       // base vertices, degree
  std::vector<int> eu, ev;        // geometric edges of the base
  std::vector<int> slot_of_edge;  // index into the voltage tuple, -1 = tree edge
  // scratch
  std::vector<int> uf;
  std::vector<int> color, stack, fill;
  std::vector<int> adj_off, adj;  // rebuilt per candidate

  VoltageScanner(const SerreGraph& base, const SpanningTree& tree, int degree)
      : n(base.num_vertices()), d(degree) {
    std::map<int, int> slot;
    for (size_t s = 0; s < tree.extra_reps.size(); ++s)
      slot[tree.extra_reps[s]] = (int)s;
    for (int e : base.geometric_reps()) {
      eu.push_back(base.iota(e));
      ev.push_back(base.tau(e));
      auto it = slot.find(e);
      slot_of_edge.push_back(it == slot.end() ? -1 : it->second);
    }
    uf.resize(n * d);
    color.resize(n * d);
    fill.resize(n * d);
    stack.reserve(n * d);
    adj_off.assign(n * d + 1, 0);
    std::vector<int> deg(n, 0);
    for (size_t i = 0; i < eu.size(); ++i) {
      ++deg[eu[i]];
      ++deg[ev[i]];
    }
    for (int v = 0; v < n; ++v)
      for (int i = 0; i < d; ++i) adj_off[v * d + i + 1] = deg[v];
    for (int i = 1; i <= n * d; ++i) adj_off[i] += adj_off[i - 1];
    adj.resize(adj_off[n * d]);
  }

  int find(int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  }

  // voltages: one Perm per slot
  bool connected(const std::vector<const Perm*>& volt) {
    for (int i = 0; i < n * d; ++i) uf[i] = i;
    int parts = n * d;
    for (size_t ei = 0; ei < eu.size(); ++ei) {
      const Perm* s = slot_of_edge[ei] < 0 ? nullptr : volt[slot_of_edge[ei]];
      for (int i = 0; i < d; ++i) {
        int a = find(eu[ei] * d + i);
        int b = find(ev[ei] * d + (s ? (*s)[i] : i));
        if (a != b) {
          uf[a] = b;
          --parts;
        }
      }
    }
    return parts == 1;
  }

  bool bipartite(const std::vector<const Perm*>& volt) {
    std::fill(color.begin(), color.end(), -1);
    std::fill(fill.begin(), fill.end(), 0);
    for (size_t ei = 0; ei < eu.size(); ++ei) {
      const Perm* s = slot_of_edge[ei] < 0 ? nullptr : volt[slot_of_edge[ei]];
      for (int i = 0; i < d; ++i) {
        int a = eu[ei] * d + i;
        int b = ev[ei] * d + (s ? (*s)[i] : i);
        adj[adj_off[a] + fill[a]++] = b;
        adj[adj_off[b] + fill[b]++] = a;
      }
    }
    for (int sv = 0; sv < n * d; ++sv) {
      if (color[sv] >= 0) continue;
      color[sv] = 0;
      stack.clear();
      stack.push_back(sv);
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int k = adj_off[v]; k < adj_off[v + 1]; ++k) {
          int u = adj[k];
          if (color[u] < 0) {
            color[u] = 1 - color[v];
            stack.push_back(u);
          } else if (color[u] == color[v]) {
            return false;
          }
        }
      }
    }
    return true;
  }
};

}  // namespace detail

inline std::optional<CommonCover> brute_force_common_cover(
    const SerreGraph& x1, const SerreGraph& x2, int max_degree,
    const Coloring* c1 = nullptr, const Coloring* c2 = nullptr,
    long long budget = 60'000'000) {
  if (!x1.is_connected() || !x2.is_connected())
    throw error(errc::invalid_argument, "common covers need connected inputs");
  if (!profiles_match(x1, c1, x2, c2)) return std::nullopt;
  auto tree = spanning_tree(x1);
  const auto& extras = tree.extra_reps;
  const bool need_bipartite = detail::is_bipartite(x2);
  long long examined = 0;
  for (int d = 1; d <= max_degree; ++d) {
    if (((long long)x1.num_vertices() * d) % x2.num_vertices() != 0) continue;
    // with no extra edges the voltage cover is a disjoint union of tree
    // copies, connected only at degree 1
    if (extras.empty() && d > 1) continue;
    auto classes = detail::conjugacy_class_reps(d);
    auto perms = detail::all_perms(d);
    std::vector<int> idx(extras.size(), 0);
    // the first slot ranges over conjugacy class representatives only:
    // conjugating every voltage by one permutation relabels the fibers
    auto slot_count = [&](size_t slot) {
      return slot == 0 ? classes.size() : perms.size();
    };
    auto slot_perm = [&](size_t slot, int i) -> const Perm& {
      return slot == 0 ? classes[i] : perms[i];
    };
    detail::VoltageScanner scan(x1, tree, d);
    std::vector<const Perm*> volt(extras.size());
    while (true) {
      if (++examined > budget)
        throw error(errc::search_bound_exceeded, "voltage enumeration budget");
      for (size_t s = 0; s < extras.size(); ++s) volt[s] = &slot_perm(s, idx[s]);
      if (scan.connected(volt) && (!need_bipartite || scan.bipartite(volt))) {
        std::map<int, Perm> voltmap;
        for (size_t s = 0; s < extras.size(); ++s) voltmap[extras[s]] = *volt[s];
        auto vc = voltage_cover(x1, d, voltmap);
        Coloring lifted;
        const Coloring* lc = nullptr;
        if (c1) {
          lifted = detail::lift_coloring(vc.graph, vc.projection, *c1, x1);
          lc = &lifted;
        }
        auto onto = detail::find_covering_morphism(vc.graph, x2, lc, c2);
        if (onto) {
          auto r1 = is_covering(vc.projection);
          auto r2 = is_covering(*onto);
          if (r1.covering && r2.covering)
            return CommonCover{vc.graph, vc.projection, *onto, "voltage-oracle"};
        }
      }
      size_t s = 0;
      while (s < extras.size()) {
        if (++idx[s] < (int)slot_count(s)) break;
        idx[s] = 0;
        ++s;
      }
      if (s == extras.size()) break;
    }
  }
  throw error(errc::search_bound_exceeded,
              "no common cover within degree " + std::to_string(max_degree));
}

// ---------------------------------------------------------------------------
// Constructive common covers.

namespace detail {

// both graphs connected and 2-regular: align around the lcm cycle
inline std::optional<CommonCover> cycle_fast_path(const SerreGraph& x1,
                                                  const SerreGraph& x2) {
  auto two_regular = [](const SerreGraph& g) {
    for (int v = 0; v < g.num_vertices(); ++v)
      if (g.degree(v) != 2) return false;
    return g.num_vertices() > 0 && g.is_connected();
  };
  if (!two_regular(x1) || !two_regular(x2)) return std::nullopt;
  auto cycle_walk = [](const SerreGraph& g) {
    // cyclic dart sequence: leave vertex 0 along the first available dart
    std::vector<int> seq;
    int start = g.bar(g.link(0)[0]);
    int cur = start;
    do {
      seq.push_back(cur);
      int v = g.tau(cur);
      int nxt = -1;
      for (int e : g.link(v)) {
        int cand = g.bar(e);  // dart leaving v
        if (cand != g.bar(cur)) nxt = cand;
      }
      if (nxt < 0) nxt = g.bar(cur);  // degree-2 with a single geometric edge
      cur = nxt;
    } while (cur != start);
    return seq;
  };
  auto w1 = cycle_walk(x1), w2 = cycle_walk(x2);
  long long l = std::lcm((long long)w1.size(), (long long)w2.size());
  GraphBuilder zb;
  for (long long i = 0; i < l; ++i) zb.add_vertex("z" + std::to_string(i));
  for (long long i = 0; i < l; ++i)
    zb.add_edge("z" + std::to_string(i), "z" + std::to_string((i + 1) % l),
                "ze" + std::to_string(i));
  SerreGraph z = zb.build();
  auto wrap = [&](const SerreGraph& x, const std::vector<int>& w) {
    std::vector<int> vm(z.num_vertices()), dm(z.num_darts());
    for (long long i = 0; i < l; ++i) {
      int dart = w[i % w.size()];
      vm[z.vertex_index("z" + std::to_string(i))] = x.iota(dart);
      int zd = z.dart_index("ze" + std::to_string(i));
      dm[zd] = dart;
      dm[z.bar(zd)] = x.bar(dart);
    }
    return GraphMorphism::validate(z, x, vm, dm);
  };
  auto p1 = wrap(x1, w1);
  auto p2 = wrap(x2, w2);
  if (!is_covering(p1).covering || !is_covering(p2).covering) return std::nullopt;
  return CommonCover{z, p1, p2, "cycle-lcm"};
}

// proper edge coloring with k colors on the geometric edges (loops none)
inline std::optional<std::vector<int>> proper_edge_coloring(const SerreGraph& g,
                                                            int k) {
  auto reps = g.geometric_reps();
  for (int e : reps)
    if (g.iota(e) == g.tau(e)) return std::nullopt;  // loops cannot be colored
  std::vector<int> color(reps.size(), -1);
  std::vector<std::vector<char>> used(g.num_vertices(), std::vector<char>(k, 0));
  std::function<bool(size_t)> go = [&](size_t i) -> bool {
    if (i == reps.size()) return true;
    int e = reps[i];
    for (int c = 0; c < k; ++c) {
      if (used[g.iota(e)][c] || used[g.tau(e)][c]) continue;
      used[g.iota(e)][c] = used[g.tau(e)][c] = 1;
      color[i] = c;
      if (go(i + 1)) return true;
      used[g.iota(e)][c] = used[g.tau(e)][c] = 0;
      color[i] = -1;
    }
    return false;
  };
  if (!go(0)) return std::nullopt;
  return color;
}

// k-regular pairs with proper k-edge-colorings: color-aligned tensor, then
// one component
inline std::optional<CommonCover> regular_tensor_fast_path(const SerreGraph& x1,
                                                           const SerreGraph& x2) {
  int k = x1.num_vertices() ? x1.degree(0) : -1;
  auto regular = [&](const SerreGraph& g) {
    for (int v = 0; v < g.num_vertices(); ++v)
      if (g.degree(v) != k) return false;
    return true;
  };
  if (k <= 0 || !regular(x1) || !regular(x2)) return std::nullopt;
  auto col1 = proper_edge_coloring(x1, k);
  auto col2 = proper_edge_coloring(x2, k);
  if (!col1 || !col2) return std::nullopt;
  auto reps1 = x1.geometric_reps();
  auto reps2 = x2.geometric_reps();
  GraphBuilder zb;
  auto vid = [&](int u, int w) {
    return "(" + x1.vertex_id(u) + "," + x2.vertex_id(w) + ")";
  };
  for (int u = 0; u < x1.num_vertices(); ++u)
    for (int w = 0; w < x2.num_vertices(); ++w) zb.add_vertex(vid(u, w));
  struct ZEdge {
    int d1, d2;  // darts of x1, x2 with matching color
  };
  std::vector<ZEdge> zdarts;
  int count = 0;
  for (size_t i = 0; i < reps1.size(); ++i)
    for (size_t j = 0; j < reps2.size(); ++j) {
      if ((*col1)[i] != (*col2)[j]) continue;
      int e1 = reps1[i], e2 = reps2[j];
      // two alignments of the colored edges
      zb.add_edge(vid(x1.iota(e1), x2.iota(e2)), vid(x1.tau(e1), x2.tau(e2)),
                  "t" + std::to_string(count++));
      zdarts.push_back({e1, e2});
      zb.add_edge(vid(x1.iota(e1), x2.tau(e2)), vid(x1.tau(e1), x2.iota(e2)),
                  "t" + std::to_string(count++));
      zdarts.push_back({e1, x2.bar(e2)});
    }
  SerreGraph zfull = zb.build();
  std::vector<int> vm1(zfull.num_vertices()), vm2(zfull.num_vertices());
  std::vector<int> dm1(zfull.num_darts()), dm2(zfull.num_darts());
  for (int u = 0; u < x1.num_vertices(); ++u)
    for (int w = 0; w < x2.num_vertices(); ++w) {
      int v = zfull.vertex_index(vid(u, w));
      vm1[v] = u;
      vm2[v] = w;
    }
  for (size_t i = 0; i < zdarts.size(); ++i) {
    int d = zfull.dart_index("t" + std::to_string(i));
    dm1[d] = zdarts[i].d1;
    dm2[d] = zdarts[i].d2;
    dm1[zfull.bar(d)] = x1.bar(zdarts[i].d1);
    dm2[zfull.bar(d)] = x2.bar(zdarts[i].d2);
  }
  auto p1full = GraphMorphism::validate(zfull, x1, vm1, dm1);
  auto p2full = GraphMorphism::validate(zfull, x2, vm2, dm2);
  // restrict to the component of the first vertex
  auto comp = zfull.vertex_component();
  std::vector<int> keep;
  for (int v = 0; v < zfull.num_vertices(); ++v)
    if (comp[v] == comp[0]) keep.push_back(v);
  auto sub = induced_subgraph(zfull, keep);
  std::vector<int> v1(sub.graph.num_vertices()), v2(sub.graph.num_vertices());
  std::vector<int> d1(sub.graph.num_darts()), d2(sub.graph.num_darts());
  for (int v = 0; v < sub.graph.num_vertices(); ++v) {
    v1[v] = p1full.vmap[sub.vertex_in[v]];
    v2[v] = p2full.vmap[sub.vertex_in[v]];
  }
  for (int d = 0; d < sub.graph.num_darts(); ++d) {
    d1[d] = p1full.dmap[sub.dart_in[d]];
    d2[d] = p2full.dmap[sub.dart_in[d]];
  }
  auto p1 = GraphMorphism::validate(sub.graph, x1, v1, d1);
  auto p2 = GraphMorphism::validate(sub.graph, x2, v2, d2);
  if (!is_covering(p1).covering || !is_covering(p2).covering) return std::nullopt;
  return CommonCover{sub.graph, p1, p2, "colored-tensor"};
}

}  // namespace detail

inline CommonCover common_cover_graphs(const SerreGraph& x1, const SerreGraph& x2,
                                       const CommonCoverOptions& opts = {}) {
  const Coloring* c1 = opts.colored ? &opts.c1 : nullptr;
  const Coloring* c2 = opts.colored ? &opts.c2 : nullptr;
  if (!x1.is_connected() || !x2.is_connected())
    throw error(errc::invalid_argument, "common covers need connected inputs");
  if (!profiles_match(x1, c1, x2, c2))
    throw error(errc::no_common_cover, "stable degree profiles do not match");

  // isomorphic inputs: the identity pair
  if (auto iso = find_isomorphism(x1, x2, c1, c2)) {
    auto p2 = GraphMorphism::validate(x1, x2, iso->v, iso->d);
    auto out = CommonCover{x1, GraphMorphism::identity(x1), p2, "isomorphic"};
    if (is_covering(out.p1).covering && is_covering(out.p2).covering) return out;
  }
  if (!opts.colored) {
    if (auto cyc = detail::cycle_fast_path(x1, x2)) return *cyc;
    if (auto reg = detail::regular_tensor_fast_path(x1, x2)) return *reg;
  }
  auto found = brute_force_common_cover(x1, x2, opts.max_degree, c1, c2, opts.budget);
  if (!found)
    throw error(errc::no_common_cover, "stable degree profiles do not match");
  found->strategy = "voltage-search";
  return *found;
}

// ---------------------------------------------------------------------------
// Decorations for graphs of spaces: vertex colors are canonical forms of the
// vertex space with its family of marked attachment images, dart colors
// additionally distinguish the attaching image.  The rigidity report flags
// stars whose decorated automorphisms permute marked images; the reduction
// to plain common covers is only sound for rigid stars.

struct DecorationResult {
  Coloring coloring;  // on the underlying graph
  bool rigid = true;
  std::string witness;
};

namespace detail {

// vertex space plus one tag vertex per link dart, joined to the image
struct StarAux {
  SerreGraph graph;
  Coloring colors;
  std::vector<int> tag_vertex;  // per link position
};

inline StarAux star_aux(const GraphOfSpaces& y, int v, int marked_dart = -1) {
  const SerreGraph& xs = y.vertex_space(v);
  const SerreGraph& u = y.underlying();
  GraphData data;
  for (const auto& id : xs.vertex_ids()) data.vertices.push_back("p:" + id);
  const auto& lk = u.link(v);
  for (size_t i = 0; i < lk.size(); ++i)
    data.vertices.push_back("t:" + std::to_string(i));
  for (int d = 0; d < xs.num_darts(); ++d)
    data.darts.push_back({"p:" + xs.dart_id(d), "p:" + xs.dart_id(xs.bar(d)),
                          "p:" + xs.vertex_id(xs.iota(d)),
                          "p:" + xs.vertex_id(xs.tau(d))});
  for (size_t i = 0; i < lk.size(); ++i)
    for (int x : y.attach_vmap(lk[i])) {
      std::string eid = "te:" + std::to_string(i) + ":" + xs.vertex_id(x);
      data.darts.push_back({eid, eid + "'", "t:" + std::to_string(i),
                            "p:" + xs.vertex_id(x)});
      data.darts.push_back({eid + "'", eid, "p:" + xs.vertex_id(x),
                            "t:" + std::to_string(i)});
    }
  StarAux out;
  out.graph = SerreGraph::validate(data);
  for (size_t i = 0; i < lk.size(); ++i) {
    out.colors.vertex["t:" + std::to_string(i)] =
        (int)i == marked_dart ? "tag*" : "tag";
    out.tag_vertex.push_back(out.graph.vertex_index("t:" + std::to_string(i)));
  }
  return out;
}

}  // namespace detail

inline DecorationResult gos_decoration(const GraphOfSpaces& y) {
  DecorationResult out;
  const SerreGraph& u = y.underlying();
  for (int v = 0; v < u.num_vertices(); ++v) {
    auto aux = detail::star_aux(y, v);
    out.coloring.vertex[u.vertex_id(v)] = canonical_string(aux.graph, &aux.colors);
    // rigidity: does any decorated automorphism move a tag?
    auto res = automorphism_group_full(aux.graph, &aux.colors);
    for (const auto& m : res.elements) {
      for (int t : aux.tag_vertex)
        if (m.v[t] != t && out.rigid) {
          out.rigid = false;
          out.witness = "star of '" + u.vertex_id(v) +
                        "' has an automorphism permuting marked images";
        }
    }
    const auto& lk = u.link(v);
    for (size_t i = 0; i < lk.size(); ++i) {
      auto marked = detail::star_aux(y, v, (int)i);
      out.coloring.dart[u.dart_id(lk[i])] =
          canonical_string(marked.graph, &marked.colors) + "||" +
          canonical_string(y.edge_space_of(lk[i]));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pullback of a graph of spaces along a covering of its underlying graph:
// pieces are copied from downstairs, and the projection restricts to
// isomorphisms on every piece.

struct GosPullback {
  GraphOfSpaces total;
  GoSMorphism projection;
};

inline GosPullback pull_back_gos(const GraphOfSpaces& y, const GraphMorphism& p) {
  if (!same_graph(p.target, y.underlying()))
    throw error(errc::invalid_argument, "pullback target must be the underlying graph");
  if (!is_covering(p).covering)
    throw error(errc::invalid_argument, "pullback needs a covering of the underlying graph");
  const SerreGraph& up = p.source;
  std::vector<SerreGraph> vs;
  for (int v = 0; v < up.num_vertices(); ++v)
    vs.push_back(y.vertex_space(p.vmap[v]));
  auto reps = up.geometric_reps();
  std::vector<SerreGraph> es;
  for (int r : reps) es.push_back(y.edge_space_of(p.dmap[r]));
  std::vector<std::vector<int>> av(up.num_darts()), ad(up.num_darts());
  for (int d = 0; d < up.num_darts(); ++d) {
    av[d] = y.attach_vmap(p.dmap[d]);
    ad[d] = y.attach_dmap(p.dmap[d]);
  }
  GosPullback out;
  out.total = GraphOfSpaces::validate(up, vs, es, av, ad);
  std::vector<std::vector<int>> vv, vd, ev, ed;
  auto idm = [](int n) {
    std::vector<int> m(n);
    for (int i = 0; i < n; ++i) m[i] = i;
    return m;
  };
  for (int v = 0; v < up.num_vertices(); ++v) {
    vv.push_back(idm(vs[v].num_vertices()));
    vd.push_back(idm(vs[v].num_darts()));
  }
  for (size_t i = 0; i < reps.size(); ++i) {
    ev.push_back(idm(es[i].num_vertices()));
    ed.push_back(idm(es[i].num_darts()));
  }
  out.projection =
      GoSMorphism::validate(out.total, y, p.vmap, p.dmap, vv, vd, ev, ed);
  return out;
}

// ---------------------------------------------------------------------------
// Common finite covers of graphs of spaces, under star rigidity.  The
// underlying decorated graphs get a common cover, pieces are pulled back
// along the first projection; the second projection is completed by a
// constrained isomorphism search against the pullback along p2.

struct GosCommonCover {
  GraphOfSpaces z;
  GoSMorphism p1, p2;
};

inline GosCommonCover common_cover_gos(const GraphOfSpaces& y1,
                                       const GraphOfSpaces& y2,
                                       CommonCoverOptions opts = {}) {
  y1.require_disjoint_links("common_cover_gos");
  y2.require_disjoint_links("common_cover_gos");
  auto dec1 = gos_decoration(y1);
  auto dec2 = gos_decoration(y2);
  if (!dec1.rigid)
    throw error(errc::ambiguous_local_symmetry, dec1.witness);
  if (!dec2.rigid)
    throw error(errc::ambiguous_local_symmetry, dec2.witness);
  opts.colored = true;
  opts.c1 = dec1.coloring;
  opts.c2 = dec2.coloring;
  auto cc = common_cover_graphs(y1.underlying(), y2.underlying(), opts);
  auto pull1 = pull_back_gos(y1, cc.p1);
  auto pull2 = pull_back_gos(y2, cc.p2);
  // identify the two pullbacks over the identity of the common cover
  detail::GosIsoSearch search(pull1.total, pull2.total, 1 << 20);
  GraphMap identity_map;
  identity_map.v = perm_identity(cc.z.num_vertices());
  identity_map.d = perm_identity(cc.z.num_darts());
  search.fixed_underlying = &identity_map;
  search.want = 1;
  search.run();
  if (search.found.empty())
    throw error(errc::search_bound_exceeded,
                "piece identification over the common cover failed");
  GosCommonCover out;
  out.z = pull1.total;
  out.p1 = pull1.projection;
  out.p2 = compose_gos(search.found[0], pull2.projection);
  auto r1 = check_gos_covering(out.p1);
  auto r2 = check_gos_covering(out.p2);
  if (!r1.covering || !r2.covering)
    throw error(errc::invalid_argument,
                "constructed projections failed re-verification: " + r1.witness +
                    r2.witness);
  return out;
}

}  // namespace serre
