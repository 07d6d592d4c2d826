#pragma once
// Automorphisms and isomorphisms of finite (decorated) Serre graphs by
// backtracking over refinement-stable classes.  Pruning is only ever by
// invariants, so the search is exhaustive; the returned group is verified by
// closure enumeration within the element bound.

#include "serre/action.hpp"
#include "serre/perm.hpp"

namespace serre {

struct GraphMap {
  Perm v, d;
};

namespace detail {

struct ResolvedColors {
  std::vector<int> vcol, dcol;
};

// Interns colors of several graphs against a shared table so classes align.
inline std::vector<ResolvedColors> resolve_colors(
    const std::vector<const SerreGraph*>& graphs,
    const std::vector<const Coloring*>& colorings) {
  std::map<std::string, int> vtab, dtab;
  std::vector<ResolvedColors> out(graphs.size());
  for (size_t i = 0; i < graphs.size(); ++i) {
    const SerreGraph& g = *graphs[i];
    out[i].vcol.resize(g.num_vertices());
    out[i].dcol.resize(g.num_darts());
    for (int v = 0; v < g.num_vertices(); ++v) {
      std::string c = colorings[i] ? colorings[i]->vcolor(g, v) : std::string();
      out[i].vcol[v] = vtab.emplace(c, (int)vtab.size()).first->second;
    }
    for (int d = 0; d < g.num_darts(); ++d) {
      std::string c = colorings[i] ? colorings[i]->dcolor(g, d) : std::string();
      out[i].dcol[d] = dtab.emplace(c, (int)dtab.size()).first->second;
    }
  }
  return out;
}

struct Refined {
  std::vector<int> vclass, dclass;
  int rounds = 0;
};

// Iterated recoloring to a stable partition.  Dart classes see their color,
// endpoints' classes and the bar class; vertex classes see their color and
// the multiset of incoming dart classes.
inline Refined stable_refinement(const SerreGraph& g, std::vector<int> vcol,
                                 std::vector<int> dcol) {
  Refined r;
  r.vclass = std::move(vcol);
  r.dclass = std::move(dcol);
  while (true) {
    std::map<std::vector<int>, int> dsig;
    std::vector<int> nd(g.num_darts());
    for (int d = 0; d < g.num_darts(); ++d) {
      std::vector<int> sig{r.dclass[d], r.dclass[g.bar(d)], r.vclass[g.iota(d)],
                           r.vclass[g.tau(d)]};
      nd[d] = dsig.emplace(std::move(sig), (int)dsig.size()).first->second;
    }
    std::map<std::vector<int>, int> vsig;
    std::vector<int> nv(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v) {
      std::vector<int> sig{r.vclass[v]};
      std::vector<int> in;
      for (int e : g.link(v)) in.push_back(nd[e]);
      std::sort(in.begin(), in.end());
      sig.insert(sig.end(), in.begin(), in.end());
      sig.push_back(-1);
      nv[v] = vsig.emplace(std::move(sig), (int)vsig.size()).first->second;
    }
    bool stable = true;
    {
      // stable when the new classes induce the same partitions
      std::map<int, int> vm, dm;
      for (int v = 0; v < g.num_vertices(); ++v) {
        auto it = vm.find(r.vclass[v]);
        if (it == vm.end())
          vm[r.vclass[v]] = nv[v];
        else if (it->second != nv[v])
          stable = false;
      }
      std::map<int, int> back;
      for (int v = 0; v < g.num_vertices() && stable; ++v) {
        auto it = back.find(nv[v]);
        if (it == back.end())
          back[nv[v]] = r.vclass[v];
        else if (it->second != r.vclass[v])
          stable = false;
      }
      for (int d = 0; d < g.num_darts() && stable; ++d) {
        auto it = dm.find(r.dclass[d]);
        if (it == dm.end())
          dm[r.dclass[d]] = nd[d];
        else if (it->second != nd[d])
          stable = false;
      }
      std::map<int, int> dback;
      for (int d = 0; d < g.num_darts() && stable; ++d) {
        auto it = dback.find(nd[d]);
        if (it == dback.end())
          dback[nd[d]] = r.dclass[d];
        else if (it->second != r.dclass[d])
          stable = false;
      }
    }
    r.vclass = std::move(nv);
    r.dclass = std::move(nd);
    if (stable) break;
    ++r.rounds;
  }
  return r;
}

// Backtracking engine enumerating structure-and-class-preserving bijections
// g1 -> g2.  Used for isomorphisms (joint classes) and automorphisms.
class IsoSearch {
 public:
  IsoSearch(const SerreGraph& g1, const SerreGraph& g2,
            const std::vector<int>& vclass1, const std::vector<int>& dclass1,
            const std::vector<int>& vclass2, const std::vector<int>& dclass2)
      : g1_(g1), g2_(g2), vc1_(vclass1), dc1_(dclass1), vc2_(vclass2), dc2_(dclass2) {}

  // Calls sink for every isomorphism; sink returns false to stop the search.
  void run(const std::function<bool(const GraphMap&)>& sink) {
    if (g1_.num_vertices() != g2_.num_vertices() ||
        g1_.num_darts() != g2_.num_darts())
      return;
    {
      std::multiset<int> a(vc1_.begin(), vc1_.end()), b(vc2_.begin(), vc2_.end());
      if (a != b) return;
      std::multiset<int> c(dc1_.begin(), dc1_.end()), d(dc2_.begin(), dc2_.end());
      if (c != d) return;
    }
    order_.clear();
    for (int v = 0; v < g1_.num_vertices(); ++v) order_.push_back(v);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return vc1_[a] < vc1_[b]; });
    vmap_.assign(g1_.num_vertices(), -1);
    used_.assign(g2_.num_vertices(), 0);
    stop_ = false;
    sink_ = &sink;
    place(0);
    sink_ = nullptr;
  }

 private:
  void place(size_t k) {
    if (stop_) return;
    if (k == order_.size()) {
      extend_darts();
      return;
    }
    int v = order_[k];
    for (int w = 0; w < g2_.num_vertices(); ++w) {
      if (used_[w] || vc2_[w] != vc1_[v]) continue;
      if (!compatible(v, w)) continue;
      vmap_[v] = w;
      used_[w] = 1;
      place(k + 1);
      vmap_[v] = -1;
      used_[w] = 0;
      if (stop_) return;
    }
  }

  // Checks dart-class multisets between v and every already-placed vertex.
  bool compatible(int v, int w) const {
    std::map<std::pair<int, int>, std::multiset<int>> need, have;
    for (int e : g1_.link(v)) {
      int u = g1_.iota(e);
      if (u != v && vmap_[u] < 0) continue;
      int uu = (u == v) ? w : vmap_[u];
      need[{uu, 0}].insert(dc1_[e]);
    }
    for (int e : g2_.link(w)) {
      int u = g2_.iota(e);
      have[{u, 0}].insert(dc2_[e]);
    }
    for (auto& [key, ms] : need) {
      auto it = have.find(key);
      if (it == have.end() || !std::includes(it->second.begin(), it->second.end(),
                                             ms.begin(), ms.end()))
        return false;
    }
    return true;
  }

  // All dart bijections compatible with the fixed vertex map.
  void extend_darts() {
    // group source geometric reps by ordered endpoint pair
    std::map<std::pair<int, int>, std::vector<int>> src, dst;
    for (int d : g1_.geometric_reps()) {
      int a = g1_.iota(d), b = g1_.tau(d);
      if (a <= b)
        src[{a, b}].push_back(d);
      else
        src[{b, a}].push_back(g1_.bar(d));
    }
    for (int d : g2_.geometric_reps()) {
      int a = g2_.iota(d), b = g2_.tau(d);
      if (a <= b)
        dst[{a, b}].push_back(d);
      else
        dst[{b, a}].push_back(g2_.bar(d));
    }
    groups_.clear();
    for (auto& [pair, list] : src) {
      std::pair<int, int> img{vmap_[pair.first], vmap_[pair.second]};
      bool flip = img.first > img.second;
      if (flip) std::swap(img.first, img.second);
      auto it = dst.find(img);
      if (it == dst.end() || it->second.size() != list.size()) return;
      groups_.push_back({list, it->second, pair.first == pair.second, flip});
    }
    dmap_.assign(g1_.num_darts(), -1);
    dused_.assign(g2_.num_darts(), 0);
    match_group(0, 0);
  }

  struct EdgeGroup {
    std::vector<int> src, dst;  // oriented low -> high endpoint (or loops)
    bool loop;
    bool flip;  // vertex map reverses the endpoint order
  };

  void match_group(size_t gi, size_t si) {
    if (stop_) return;
    if (gi == groups_.size()) {
      GraphMap m;
      m.v = vmap_;
      m.d = dmap_;
      if (!(*sink_)(m)) stop_ = true;
      return;
    }
    const EdgeGroup& grp = groups_[gi];
    if (si == grp.src.size()) {
      match_group(gi + 1, 0);
      return;
    }
    int e = grp.src[si];
    for (int f0 : grp.dst) {
      // a geometric edge can match in either orientation; for non-loop
      // groups the orientation is forced by the vertex map
      for (int variant = 0; variant < 2; ++variant) {
        int f = variant ? g2_.bar(f0) : f0;
        if (!grp.loop) {
          bool need_flip = grp.flip;
          bool is_flip = variant == 1;
          if (need_flip != is_flip) continue;
        }
        if (dused_[f] || dused_[g2_.bar(f)]) continue;
        if (g2_.iota(f) != vmap_[g1_.iota(e)] || g2_.tau(f) != vmap_[g1_.tau(e)])
          continue;
        if (dc2_[f] != dc1_[e] || dc2_[g2_.bar(f)] != dc1_[g1_.bar(e)]) continue;
        dmap_[e] = f;
        dmap_[g1_.bar(e)] = g2_.bar(f);
        dused_[f] = dused_[g2_.bar(f)] = 1;
        match_group(gi, si + 1);
        dused_[f] = dused_[g2_.bar(f)] = 0;
        dmap_[e] = dmap_[g1_.bar(e)] = -1;
        if (stop_) return;
      }
    }
  }

  const SerreGraph& g1_;
  const SerreGraph& g2_;
  const std::vector<int>&vc1_, &dc1_, &vc2_, &dc2_;
  std::vector<int> order_, vmap_, dmap_;
  std::vector<char> used_, dused_;
  std::vector<EdgeGroup> groups_;
  const std::function<bool(const GraphMap&)>* sink_ = nullptr;
  bool stop_ = false;
};

// Joint refinement of two colored graphs (on their disjoint union), so that
// class ids are comparable across the pair.
struct JointClasses {
  std::vector<int> vclass1, dclass1, vclass2, dclass2;
};

inline JointClasses joint_refinement(const SerreGraph& g1, const Coloring* c1,
                                     const SerreGraph& g2, const Coloring* c2) {
  auto res = resolve_colors({&g1, &g2}, {c1, c2});
  SerreGraph u = disjoint_union(g1, g2, "1:", "2:");
  std::vector<int> vcol(u.num_vertices()), dcol(u.num_darts());
  for (int v = 0; v < g1.num_vertices(); ++v)
    vcol[u.vertex_index("1:" + g1.vertex_id(v))] = res[0].vcol[v];
  for (int v = 0; v < g2.num_vertices(); ++v)
    vcol[u.vertex_index("2:" + g2.vertex_id(v))] = res[1].vcol[v];
  for (int d = 0; d < g1.num_darts(); ++d)
    dcol[u.dart_index("1:" + g1.dart_id(d))] = res[0].dcol[d];
  for (int d = 0; d < g2.num_darts(); ++d)
    dcol[u.dart_index("2:" + g2.dart_id(d))] = res[1].dcol[d];
  auto r = stable_refinement(u, std::move(vcol), std::move(dcol));
  JointClasses out;
  out.vclass1.resize(g1.num_vertices());
  out.dclass1.resize(g1.num_darts());
  out.vclass2.resize(g2.num_vertices());
  out.dclass2.resize(g2.num_darts());
  for (int v = 0; v < g1.num_vertices(); ++v)
    out.vclass1[v] = r.vclass[u.vertex_index("1:" + g1.vertex_id(v))];
  for (int v = 0; v < g2.num_vertices(); ++v)
    out.vclass2[v] = r.vclass[u.vertex_index("2:" + g2.vertex_id(v))];
  for (int d = 0; d < g1.num_darts(); ++d)
    out.dclass1[d] = r.dclass[u.dart_index("1:" + g1.dart_id(d))];
  for (int d = 0; d < g2.num_darts(); ++d)
    out.dclass2[d] = r.dclass[u.dart_index("2:" + g2.dart_id(d))];
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Isomorphisms between colored graphs.  Returns up to `cap` maps.

inline std::vector<GraphMap> all_isomorphisms(const SerreGraph& g1,
                                              const SerreGraph& g2,
                                              const Coloring* c1 = nullptr,
                                              const Coloring* c2 = nullptr,
                                              size_t cap = SIZE_MAX) {
  auto jc = detail::joint_refinement(g1, c1, g2, c2);
  detail::IsoSearch search(g1, g2, jc.vclass1, jc.dclass1, jc.vclass2, jc.dclass2);
  std::vector<GraphMap> found;
  search.run([&](const GraphMap& m) {
    found.push_back(m);
    return found.size() < cap;
  });
  return found;
}

inline std::optional<GraphMap> find_isomorphism(const SerreGraph& g1,
                                                const SerreGraph& g2,
                                                const Coloring* c1 = nullptr,
                                                const Coloring* c2 = nullptr) {
  auto all = all_isomorphisms(g1, g2, c1, c2, 1);
  if (all.empty()) return std::nullopt;
  return all[0];
}

inline bool is_isomorphic(const SerreGraph& g1, const SerreGraph& g2,
                          const Coloring* c1 = nullptr,
                          const Coloring* c2 = nullptr) {
  return find_isomorphism(g1, g2, c1, c2).has_value();
}

// ---------------------------------------------------------------------------
// The full color-preserving automorphism group, acting on vertices |_| darts
// with domain ids "v:<id>" and "d:<id>".

struct AutomorphismGroupResult {
  PermGroup group;                 // on vertices |_| darts
  std::vector<GraphMap> elements;  // every automorphism, enumeration order
};

inline Perm graphmap_to_domain_perm(const SerreGraph& g, const GraphMap& m) {
  Perm p(g.num_vertices() + g.num_darts());
  for (int v = 0; v < g.num_vertices(); ++v) p[v] = m.v[v];
  for (int d = 0; d < g.num_darts(); ++d) p[g.num_vertices() + d] = g.num_vertices() + m.d[d];
  return p;
}

inline GraphMap domain_perm_to_graphmap(const SerreGraph& g, const Perm& p) {
  GraphMap m;
  m.v.assign(p.begin(), p.begin() + g.num_vertices());
  m.d.resize(g.num_darts());
  for (int d = 0; d < g.num_darts(); ++d)
    m.d[d] = p[g.num_vertices() + d] - g.num_vertices();
  return m;
}

inline std::vector<std::string> aut_domain(const SerreGraph& g) {
  std::vector<std::string> dom;
  for (const auto& v : g.vertex_ids()) dom.push_back("v:" + v);
  for (const auto& d : g.dart_ids()) dom.push_back("d:" + d);
  return dom;
}

inline AutomorphismGroupResult automorphism_group_full(
    const SerreGraph& g, const Coloring* c = nullptr,
    int element_bound = kDefaultElementBound) {
  auto res = detail::resolve_colors({&g}, {c});
  auto r = detail::stable_refinement(g, res[0].vcol, res[0].dcol);
  detail::IsoSearch search(g, g, r.vclass, r.dclass, r.vclass, r.dclass);
  AutomorphismGroupResult out;
  bool overflow = false;
  search.run([&](const GraphMap& m) {
    out.elements.push_back(m);
    if ((int)out.elements.size() > element_bound) {
      overflow = true;
      return false;
    }
    return true;
  });
  if (overflow)
    throw error(errc::element_bound_exceeded, "automorphism enumeration");
  std::vector<Perm> perms;
  for (const auto& m : out.elements) perms.push_back(graphmap_to_domain_perm(g, m));
  PermGroup all(aut_domain(g), {}, element_bound);
  out.group = all.spanned_by(perms);
  if (out.group.order() != (long long)out.elements.size())
    throw error(errc::invalid_argument,
                "automorphism closure does not match the enumeration");
  return out;
}

inline PermGroup automorphism_group(const SerreGraph& g,
                                    const Coloring* c = nullptr,
                                    int element_bound = kDefaultElementBound) {
  return automorphism_group_full(g, c, element_bound).group;
}

// The natural action of (a subgroup of) the automorphism group on its graph.
inline GroupAction automorphism_action(const SerreGraph& g, const PermGroup& aut) {
  std::vector<Perm> vg, dg;
  for (const auto& p : aut.generators()) {
    GraphMap m = domain_perm_to_graphmap(g, p);
    vg.push_back(m.v);
    dg.push_back(m.d);
  }
  return GroupAction(aut, g, vg, dg);
}

// ---------------------------------------------------------------------------
// Stable degree/color classes, exposed for soundness checks.

struct StableClasses {
  std::vector<int> vclass, dclass;
};

inline StableClasses stable_classes(const SerreGraph& g, const Coloring* c = nullptr) {
  auto res = detail::resolve_colors({&g}, {c});
  auto r = detail::stable_refinement(g, res[0].vcol, res[0].dcol);
  return {r.vclass, r.dclass};
}

// ---------------------------------------------------------------------------
// max over vertices x, y of |G_x . y| together with an attaining pair.

struct OrbitBound {
  long long bound = 0;
  int x = -1, y = -1;
};

inline OrbitBound vertex_stabilizer_orbit_bound(const GroupAction& a) {
  OrbitBound out;
  for (int x = 0; x < a.graph().num_vertices(); ++x) {
    PermGroup stab = a.vertex_stabilizer(x);
    for (int y = 0; y < a.graph().num_vertices(); ++y) {
      auto orb = a.vertex_orbit(stab, y);
      if ((long long)orb.size() > out.bound) {
        out.bound = (long long)orb.size();
        out.x = x;
        out.y = y;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical form: the lexicographically least encoding over all labelings.
// Exponential in the worst case but exact; intended for small pieces.

namespace detail {

struct CanonState {
  const SerreGraph* g;
  std::vector<std::vector<long long>> best;  // per-position token rows
  bool have_best = false;
};

inline std::vector<long long> canon_row(const SerreGraph& g,
                                        const std::vector<int>& label,
                                        const std::vector<int>& order, size_t k,
                                        const std::vector<int>& vcol,
                                        const std::vector<int>& dcol) {
  // tokens of vertex order[k] against already-labeled vertices; more edges
  // into the prefix compare smaller, which keeps minimal prefixes connected
  // and makes the pruning bite
  int v = order[k];
  const long long Z = 1 + std::max(g.num_darts(), g.num_vertices() + 2);
  std::vector<long long> row{(long long)vcol[v]};
  std::vector<long long> etoks;
  for (int e : g.link(v)) {
    int u = g.iota(e);
    if (label[u] < 0) continue;
    if (u == v) {
      // loops have no preferred orientation; order the color pair
      if (g.bar(e) < e) continue;
      auto [lo, hi] = std::minmax(dcol[e], dcol[g.bar(e)]);
      etoks.push_back(((long long)label[u] * Z + lo) * Z + hi);
    } else {
      etoks.push_back(((long long)label[u] * Z + dcol[e]) * Z + dcol[g.bar(e)]);
    }
  }
  std::sort(etoks.begin(), etoks.end());
  row.push_back(-(long long)etoks.size());
  row.insert(row.end(), etoks.begin(), etoks.end());
  return row;
}

inline void canon_search(const SerreGraph& g, const std::vector<int>& vcol,
                         const std::vector<int>& dcol, std::vector<int>& order,
                         std::vector<int>& label, size_t k,
                         std::vector<std::vector<long long>>& cur,
                         CanonState& st) {
  if (k == (size_t)g.num_vertices()) {
    // reachable only along prefixes that are allowed against the incumbent,
    // so the candidate is never worse than it
    st.best = cur;
    st.have_best = true;
    return;
  }
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (label[v] >= 0) continue;
    order[k] = v;
    label[v] = (int)k;
    auto row = canon_row(g, label, order, k, vcol, dcol);
    if (!st.have_best) {
      cur.push_back(std::move(row));
      canon_search(g, vcol, dcol, order, label, k + 1, cur, st);
      cur.pop_back();
    } else if (row <= st.best[k]) {
      if (row < st.best[k]) {
        // the whole subtree beats the incumbent; find its true minimum
        st.have_best = false;
        st.best.clear();
      }
      cur.push_back(std::move(row));
      canon_search(g, vcol, dcol, order, label, k + 1, cur, st);
      cur.pop_back();
    }
    label[v] = -1;
  }
  order[k] = -1;
}

}  // namespace detail

// Canonical string: equal for two colored graphs iff they are isomorphic as
// colored Serre graphs.  Color strings are embedded literally so canonical
// strings are comparable across graphs.
inline std::string canonical_string(const SerreGraph& g, const Coloring* c = nullptr) {
  // order color names deterministically, then search for the least encoding
  std::map<std::string, int> vtab, dtab;
  std::vector<int> vcol(g.num_vertices()), dcol(g.num_darts());
  std::vector<std::string> vnames, dnames;
  {
    std::set<std::string> vs, ds;
    for (int v = 0; v < g.num_vertices(); ++v)
      vs.insert(c ? c->vcolor(g, v) : std::string());
    for (int d = 0; d < g.num_darts(); ++d)
      ds.insert(c ? c->dcolor(g, d) : std::string());
    for (const auto& s : vs) {
      vtab[s] = (int)vnames.size();
      vnames.push_back(s);
    }
    for (const auto& s : ds) {
      dtab[s] = (int)dnames.size();
      dnames.push_back(s);
    }
  }
  for (int v = 0; v < g.num_vertices(); ++v)
    vcol[v] = vtab[c ? c->vcolor(g, v) : std::string()];
  for (int d = 0; d < g.num_darts(); ++d)
    dcol[d] = dtab[c ? c->dcolor(g, d) : std::string()];

  detail::CanonState st;
  st.g = &g;
  std::vector<int> order(g.num_vertices(), -1), label(g.num_vertices(), -1);
  std::vector<std::vector<long long>> cur;
  detail::canon_search(g, vcol, dcol, order, label, 0, cur, st);

  std::string out = "V" + std::to_string(g.num_vertices()) + ";D" +
                    std::to_string(g.num_darts()) + ";";
  out += "vc[";
  for (size_t i = 0; i < vnames.size(); ++i) out += vnames[i] + "|";
  out += "];dc[";
  for (size_t i = 0; i < dnames.size(); ++i) out += dnames[i] + "|";
  out += "];";
  for (const auto& row : st.best) {
    for (long long t : row) out += std::to_string(t) + ",";
    out += ";";
  }
  return out;
}

}  // namespace serre
