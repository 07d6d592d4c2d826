#pragma once
// Blowups of finite group actions on finite trees: input normalization,
// the coset construction with typed edges, verification, tree refinement,
// and the imprimitivity quotient that collapses fibers along equivariant
// subgroup families.

#include <tuple>

#include "serre/action.hpp"
#include "serre/autgrp.hpp"

namespace serre {

struct OmegaRef {
  bool is_edge = false;
  int idx = -1;  // vertex index, or geometric rep dart index

  bool operator<(const OmegaRef& o) const {
    return std::tie(is_edge, idx) < std::tie(o.is_edge, o.idx);
  }
  bool operator==(const OmegaRef& o) const {
    return is_edge == o.is_edge && idx == o.idx;
  }
};

struct BlowupInput {
  GroupAction action;             // G acting on a tree T
  std::vector<int> vertex_reps;   // orbit representatives of vertices
  std::vector<int> edge_reps;     // orbit representatives of geometric edges (rep darts)
  PermGroup k;                    // the coset subgroup
  std::map<int, std::vector<Perm>> s_vertex;  // S_w keyed by vertex rep
  std::map<int, std::vector<Perm>> s_edge;    // S_w keyed by rep dart
  std::vector<Perm> f;

  std::vector<OmegaRef> omega() const {
    std::vector<OmegaRef> out;
    for (int v : vertex_reps) out.push_back({false, v});
    for (int e : edge_reps) out.push_back({true, e});
    return out;
  }

  const std::vector<Perm>& s_of(const OmegaRef& w) const {
    static const std::vector<Perm> empty;
    const auto& m = w.is_edge ? s_edge : s_vertex;
    auto it = m.find(w.idx);
    return it == m.end() ? empty : it->second;
  }

  PermGroup stabilizer(const OmegaRef& w) const {
    return w.is_edge ? action.edge_stabilizer(w.idx) : action.vertex_stabilizer(w.idx);
  }
};

namespace detail {

inline void check_blowup_structure(const BlowupInput& in) {
  const SerreGraph& t = in.action.graph();
  if (!t.is_tree()) throw error(errc::not_a_tree, "the carrier graph is not a tree");
  if (!in.k.is_subgroup_of(in.action.group()))
    throw error(errc::not_a_subgroup, "K is not a subgroup of G");
  // vertex reps: exactly one per orbit (two reps in one orbit collide when
  // the second orbit is traversed)
  std::vector<char> covered(t.num_vertices(), 0);
  for (int v : in.vertex_reps)
    for (int u : in.action.vertex_orbit(in.action.group(), v)) {
      if (covered[u])
        throw error(errc::orbit_reps_invalid, "two vertex reps share an orbit");
      covered[u] = 1;
    }
  for (int v = 0; v < t.num_vertices(); ++v)
    if (!covered[v])
      throw error(errc::orbit_reps_invalid,
                  "vertex '" + t.vertex_id(v) + "' is in no represented orbit");
  // edge reps: one per geometric edge orbit
  const auto& table = in.action.table();
  std::set<int> ecovered;
  for (int e : in.edge_reps) {
    if (t.rep(e) != e)
      throw error(errc::orbit_reps_invalid, "edge rep is not a canonical dart");
    std::set<int> orb;
    for (size_t i = 0; i < table.el.size(); ++i) orb.insert(t.rep(table.dp[i][e]));
    for (int x : orb) {
      if (ecovered.count(x))
        throw error(errc::orbit_reps_invalid, "two edge reps share an orbit");
      ecovered.insert(x);
    }
  }
  for (int e : t.geometric_reps())
    if (!ecovered.count(e))
      throw error(errc::orbit_reps_invalid,
                  "edge '" + t.dart_id(e) + "' is in no represented orbit");
  // S elements live inside their stabilizers
  for (const auto& w : in.omega()) {
    PermGroup gw = in.stabilizer(w);
    for (const auto& p : in.s_of(w))
      if (!gw.contains(p))
        throw error(errc::invalid_argument, "an S_w element is outside the stabilizer");
  }
}

inline std::vector<Perm> symmetrized(const std::vector<Perm>& s) {
  std::set<Perm> out(s.begin(), s.end());
  for (const auto& p : s) out.insert(perm_inverse(p));
  return {out.begin(), out.end()};
}

}  // namespace detail

struct NormalizeReport {
  bool k_changed = false;
  std::map<std::string, int> s_added;  // per omega id, elements appended
  int f_added = 0;
};

// Input normalization: K is replaced by the intersection of K with every
// representative stabilizer, the S_w are completed greedily until S_w + K
// generates the stabilizer, and F is completed until the closure of the
// representatives is covered by F-translates.  Completions pick the least
// available element, so runs are reproducible.
inline BlowupInput normalize_input(BlowupInput in, NormalizeReport* report = nullptr) {
  detail::check_blowup_structure(in);
  const PermGroup& g = in.action.group();
  NormalizeReport rep;

  PermGroup k0 = in.k;
  for (const auto& w : in.omega())
    k0 = subgroup_intersection(g, k0, in.stabilizer(w));
  rep.k_changed = k0.order() != in.k.order();
  in.k = k0;

  for (const auto& w : in.omega()) {
    PermGroup gw = in.stabilizer(w);
    std::vector<Perm> s = detail::symmetrized(in.s_of(w));
    size_t initial = s.size();
    auto generated = [&]() {
      std::vector<Perm> gens = s;
      for (const auto& p : in.k.generators()) gens.push_back(p);
      return g.with_generators(gens);
    };
    PermGroup h = generated();
    while (h.order() < gw.order()) {
      for (const auto& cand : gw.elements())
        if (!h.contains(cand)) {
          s.push_back(cand);
          s = detail::symmetrized(s);
          break;
        }
      h = generated();
    }
    const SerreGraph& t = in.action.graph();
    std::string wid = w.is_edge ? "e:" + t.dart_id(w.idx) : t.vertex_id(w.idx);
    if (s.size() != initial) rep.s_added[wid] = (int)(s.size() - initial);
    if (w.is_edge)
      in.s_edge[w.idx] = s;
    else
      in.s_vertex[w.idx] = s;
  }

  // closure of the representatives: the reps plus the endpoints of rep edges
  const SerreGraph& t = in.action.graph();
  std::set<int> omega_vertices(in.vertex_reps.begin(), in.vertex_reps.end());
  std::set<int> closure_vertices = omega_vertices;
  for (int e : in.edge_reps) {
    closure_vertices.insert(t.iota(e));
    closure_vertices.insert(t.tau(e));
  }
  std::vector<Perm> f = detail::symmetrized(in.f);
  size_t f0 = f.size();
  auto vertex_covered = [&](int u) {
    for (const auto& p : f)
      for (int w : omega_vertices)
        if (in.action.act_vertex(p, w) == u) return true;
    return false;
  };
  auto edge_covered = [&](int e) {
    for (const auto& p : f)
      for (int w : in.edge_reps)
        if (t.rep(in.action.act_dart(p, w)) == e) return true;
    return false;
  };
  for (int u : closure_vertices)
    while (!vertex_covered(u)) {
      bool found = false;
      for (const auto& cand : g.elements()) {
        for (int w : omega_vertices)
          if (in.action.act_vertex(cand, w) == u) {
            f.push_back(cand);
            f = detail::symmetrized(f);
            found = true;
            break;
          }
        if (found) break;
      }
      if (!found)
        throw error(errc::orbit_reps_invalid,
                    "vertex '" + t.vertex_id(u) + "' unreachable from the reps");
    }
  for (int e : in.edge_reps)
    while (!edge_covered(e)) {
      f.push_back(perm_identity(g.domain_size()));
      f = detail::symmetrized(f);
    }
  rep.f_added = (int)(f.size() - f0);
  in.f = f;
  if (report) *report = rep;
  return in;
}

// ---------------------------------------------------------------------------
// The blowup itself.

struct BlowupResult {
  SerreGraph x;
  GroupAction action;       // G on X
  SerreGraph tree;          // T
  SerreGraph base;          // first barycentric subdivision of T
  GroupAction base_action;  // G on the subdivision
  std::vector<int> p_vertex;  // X vertex -> base vertex
  std::vector<int> p_dart;    // X dart -> base dart, -1 where the dart collapses
  std::vector<int> edge_type; // per X dart: 1 or 2
  long long coset_count = -1; // [G:K] when built by construct_blowup
  long long omega_size = -1;
};

namespace detail {

// The subdivision dart running from iota(d) toward the midpoint of the
// geometric edge of d.
inline int half_toward_mid(const SerreGraph& t, const SerreGraph& sub, int d) {
  if (t.rep(d) == d) return sub.dart_index("s0:" + t.dart_id(d));
  return sub.dart_index("s1:" + t.dart_id(d));
}

// Action of G on the barycentric subdivision, derived from the tree action.
inline GroupAction subdivision_action(const GroupAction& a,
                                      const SubdivisionResult& sub) {
  const SerreGraph& t = a.graph();
  const SerreGraph& b = sub.graph;
  std::vector<Perm> vgens, dgens;
  for (size_t k = 0; k < a.vertex_gens().size(); ++k) {
    const Perm& vg = a.vertex_gens()[k];
    const Perm& dg = a.dart_gens()[k];
    Perm vp(b.num_vertices()), dp(b.num_darts());
    for (int v = 0; v < t.num_vertices(); ++v)
      vp[sub.vertex_image[v]] = sub.vertex_image[vg[v]];
    for (auto& [e, m] : sub.midpoint_of) vp[m] = sub.midpoint_of.at(t.rep(dg[e]));
    for (int d = 0; d < t.num_darts(); ++d) {
      int src = half_toward_mid(t, b, d);
      int img = half_toward_mid(t, b, dg[d]);
      dp[src] = img;
      dp[b.bar(src)] = b.bar(img);
    }
    vgens.push_back(std::move(vp));
    dgens.push_back(std::move(dp));
  }
  return GroupAction(a.group(), b, vgens, dgens);
}

inline std::set<Perm> double_coset(const PermGroup& k, const std::vector<Perm>& mid) {
  std::set<Perm> out;
  for (const auto& k1 : k.elements())
    for (const auto& s : mid)
      for (const auto& k2 : k.elements())
        out.insert(gmul(gmul(k1, s), k2));
  return out;
}

}  // namespace detail

inline BlowupResult construct_blowup(const BlowupInput& in) {
  detail::check_blowup_structure(in);
  const PermGroup& g = in.action.group();
  const SerreGraph& t = in.action.graph();
  const auto omega = in.omega();

  // left cosets of K, canonical representative = least element
  const auto& elems = g.elements();
  std::vector<Perm> coset_rep;
  std::map<Perm, int> coset_of;
  for (const auto& e : elems) {
    if (coset_of.count(e)) continue;
    int idx = (int)coset_rep.size();
    for (const auto& kk : in.k.elements()) coset_of[gmul(e, kk)] = idx;
    coset_rep.push_back(e);
  }
  const int ncosets = (int)coset_rep.size();

  // vertex set: cosets x omega
  auto vid = [&](int ci, const OmegaRef& w) {
    return "(" + std::to_string(ci) + "," +
           (w.is_edge ? "e:" + t.dart_id(w.idx) : t.vertex_id(w.idx)) + ")";
  };
  GraphBuilder xb;
  std::vector<std::pair<int, OmegaRef>> verts;
  for (const auto& w : omega)
    for (int ci = 0; ci < ncosets; ++ci) {
      xb.add_vertex(vid(ci, w));
      verts.push_back({ci, w});
    }

  // type I edges inside the fibers, via K S_w K membership
  std::map<OmegaRef, std::set<Perm>> ksk;
  for (const auto& w : omega) ksk[w] = detail::double_coset(in.k, in.s_of(w));
  std::set<Perm> kfk = detail::double_coset(in.k, in.f);

  std::vector<std::pair<std::pair<int, int>, int>> typed_edges;  // (vert pair, type)
  auto vindex = [&](int ci, const OmegaRef& w) {
    // order matches insertion above
    int base = 0;
    for (const auto& ww : omega) {
      if (ww == w) return base + ci;
      base += ncosets;
    }
    throw error(errc::invalid_argument, "unknown omega element");
  };
  int edge_counter = 0;
  for (size_t wi = 0; wi < omega.size(); ++wi) {
    const auto& w = omega[wi];
    for (int ci = 0; ci < ncosets; ++ci)
      for (int cj = ci + 1; cj < ncosets; ++cj) {
        Perm diff = gmul(perm_inverse(coset_rep[ci]), coset_rep[cj]);
        if (ksk[w].count(diff)) {
          xb.add_edge(vid(ci, w), vid(cj, w), "I" + std::to_string(edge_counter++));
          typed_edges.push_back({{vindex(ci, w), vindex(cj, w)}, 1});
        }
      }
  }

  // type II edges between vertex fibers and midpoint fibers
  for (const auto& wv : omega) {
    if (wv.is_edge) continue;
    for (const auto& we : omega) {
      if (!we.is_edge) continue;
      for (int ci = 0; ci < ncosets; ++ci)
        for (int cj = 0; cj < ncosets; ++cj) {
          Perm diff = gmul(perm_inverse(coset_rep[ci]), coset_rep[cj]);
          if (!kfk.count(diff)) continue;
          int vimg = in.action.act_vertex(coset_rep[ci], wv.idx);
          int dimg = in.action.act_dart(coset_rep[cj], we.idx);
          if (t.iota(dimg) != vimg && t.tau(dimg) != vimg) continue;
          xb.add_edge(vid(ci, wv), vid(cj, we), "II" + std::to_string(edge_counter++));
          typed_edges.push_back({{vindex(ci, wv), vindex(cj, we)}, 2});
        }
    }
  }

  BlowupResult out;
  out.x = xb.build();
  out.tree = t;
  auto sub = barycentric_subdivision(t);
  out.base = sub.graph;
  out.base_action = detail::subdivision_action(in.action, sub);
  out.coset_count = ncosets;
  out.omega_size = (long long)omega.size();

  // the fibration
  out.p_vertex.assign(out.x.num_vertices(), -1);
  for (int xv = 0; xv < out.x.num_vertices(); ++xv) {
    auto [ci, w] = verts[xv];
    if (w.is_edge)
      out.p_vertex[xv] =
          sub.midpoint_of.at(t.rep(in.action.act_dart(coset_rep[ci], w.idx)));
    else
      out.p_vertex[xv] = sub.vertex_image[in.action.act_vertex(coset_rep[ci], w.idx)];
  }
  out.edge_type.assign(out.x.num_darts(), 0);
  out.p_dart.assign(out.x.num_darts(), -1);
  std::map<std::pair<int, int>, int> base_dart_at;
  for (int d = 0; d < out.base.num_darts(); ++d)
    base_dart_at[{out.base.iota(d), out.base.tau(d)}] = d;
  for (int d = 0; d < out.x.num_darts(); ++d) {
    int pu = out.p_vertex[out.x.iota(d)], pv = out.p_vertex[out.x.tau(d)];
    if (pu == pv) {
      out.edge_type[d] = 1;
    } else {
      out.edge_type[d] = 2;
      auto it = base_dart_at.find({pu, pv});
      if (it == base_dart_at.end())
        throw error(errc::invalid_argument, "type II dart does not project to the base");
      out.p_dart[d] = it->second;
    }
  }

  // G acts by left multiplication on the coset coordinate
  std::vector<Perm> vgens, dgens;
  std::map<std::pair<int, int>, int> xdart_at;
  for (int d = 0; d < out.x.num_darts(); ++d)
    xdart_at[{out.x.iota(d), out.x.tau(d)}] = d;
  for (const auto& gen : g.generators()) {
    Perm vp(out.x.num_vertices());
    for (int xv = 0; xv < out.x.num_vertices(); ++xv) {
      auto [ci, w] = verts[xv];
      vp[xv] = vindex(coset_of.at(gmul(gen, coset_rep[ci])), w);
    }
    Perm dp(out.x.num_darts());
    for (int d = 0; d < out.x.num_darts(); ++d) {
      auto it = xdart_at.find({vp[out.x.iota(d)], vp[out.x.tau(d)]});
      if (it == xdart_at.end())
        throw error(errc::invalid_argument, "blowup adjacency is not invariant");
      dp[d] = it->second;
    }
    vgens.push_back(std::move(vp));
    dgens.push_back(std::move(dp));
  }
  out.action = GroupAction(g, out.x, vgens, dgens);
  return out;
}

// ---------------------------------------------------------------------------
// Verification: connectivity, simpliciality, equivariance, fiber
// connectivity, surjectivity and the type dichotomy, with witnesses.

struct CheckItem {
  std::string name;
  bool ok = true;
  std::string witness;
};

struct BlowupReport {
  std::vector<CheckItem> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }
  const CheckItem* failed() const {
    for (const auto& c : checks)
      if (!c.ok) return &c;
    return nullptr;
  }
};

inline BlowupReport verify_blowup(const BlowupResult& r) {
  BlowupReport rep;
  auto add = [&](const std::string& name, bool ok, const std::string& wit) {
    rep.checks.push_back({name, ok, ok ? "" : wit});
  };

  add("connected", r.x.is_connected(), "X is not connected");

  {
    bool ok = true;
    std::string wit;
    for (int d = 0; d < r.x.num_darts() && ok; ++d) {
      int pu = r.p_vertex[r.x.iota(d)], pv = r.p_vertex[r.x.tau(d)];
      if (r.edge_type[d] == 1) {
        if (pu != pv || r.p_dart[d] != -1) {
          ok = false;
          wit = "type I dart '" + r.x.dart_id(d) + "' does not collapse";
        }
      } else if (r.edge_type[d] == 2) {
        if (r.p_dart[d] < 0 || r.base.iota(r.p_dart[d]) != pu ||
            r.base.tau(r.p_dart[d]) != pv) {
          ok = false;
          wit = "type II dart '" + r.x.dart_id(d) + "' does not map to a base dart";
        }
      } else {
        ok = false;
        wit = "untyped dart '" + r.x.dart_id(d) + "'";
      }
    }
    add("simplicial", ok, wit);
  }

  {
    bool ok = true;
    std::string wit;
    for (size_t k = 0; k < r.action.vertex_gens().size() && ok; ++k) {
      const Perm& vg = r.action.vertex_gens()[k];
      const Perm& bg = r.base_action.vertex_gens()[k];
      for (int xv = 0; xv < r.x.num_vertices(); ++xv)
        if (r.p_vertex[vg[xv]] != bg[r.p_vertex[xv]]) {
          ok = false;
          wit = "p(g x) != g p(x) at vertex '" + r.x.vertex_id(xv) +
                "' for generator " + std::to_string(k);
          break;
        }
    }
    add("equivariant", ok, wit);
  }

  {
    bool ok = true;
    std::string wit;
    std::vector<std::vector<int>> fibers(r.base.num_vertices());
    for (int xv = 0; xv < r.x.num_vertices(); ++xv)
      fibers[r.p_vertex[xv]].push_back(xv);
    for (int b = 0; b < r.base.num_vertices() && ok; ++b) {
      if (fibers[b].empty()) {
        ok = false;
        wit = "empty fiber over '" + r.base.vertex_id(b) + "'";
        break;
      }
      auto sub = induced_subgraph(r.x, fibers[b]);
      if (!sub.graph.is_connected()) {
        ok = false;
        wit = "fiber over '" + r.base.vertex_id(b) + "' is not connected";
      }
    }
    add("fibers_connected", ok, wit);
  }

  {
    bool ok = true;
    std::string wit;
    for (int d = 0; d < r.x.num_darts() && ok; ++d) {
      bool same = r.p_vertex[r.x.iota(d)] == r.p_vertex[r.x.tau(d)];
      bool is1 = r.edge_type[d] == 1;
      if (same != is1) {
        ok = false;
        wit = "dart '" + r.x.dart_id(d) + "' violates the type dichotomy";
      }
    }
    add("type_dichotomy", ok, wit);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Tree refinement: insert one vertex per K_v-orbit of each link.

struct RefinedTree {
  SerreGraph tree;              // T'
  GroupAction action;           // G on T'
  std::vector<int> collapse_v;  // T' vertex -> T vertex
  std::vector<int> collapse_d;  // T' dart -> T dart, -1 on star darts
  std::vector<int> vertex_type; // 1 = original, 2 = inserted
};

inline RefinedTree refine_tree(const GroupAction& a,
                               const std::map<int, PermGroup>& kv) {
  const SerreGraph& t = a.graph();
  const PermGroup& g = a.group();
  if (!t.is_tree()) throw error(errc::not_a_tree, "refine_tree needs a tree");
  for (int v = 0; v < t.num_vertices(); ++v)
    if (!kv.count(v))
      throw error(errc::not_equivariant_family, "missing subgroup at vertex '" +
                                                    t.vertex_id(v) + "'");
  // equivariance: g K_v g^-1 = K_{gv} for every generator
  for (size_t k = 0; k < a.vertex_gens().size(); ++k) {
    const Perm& gen = g.generators()[k];
    for (int v = 0; v < t.num_vertices(); ++v) {
      const PermGroup& kvv = kv.at(v);
      if (!kvv.is_subgroup_of(g))
        throw error(errc::not_a_subgroup, "K_v is not a subgroup of G");
      const PermGroup& target = kv.at(a.vertex_gens()[k][v]);
      PermGroup conj = conjugate_subgroup(g, kvv, gen);
      if (conj.order() != target.order() || !conj.is_subgroup_of(target))
        throw error(errc::not_equivariant_family,
                    "g K_v g^-1 != K_{gv} at vertex '" + t.vertex_id(v) + "'");
    }
  }
  // K_v-orbits on lk(v)
  std::map<int, std::vector<std::vector<int>>> link_orbits;  // v -> orbits of darts
  std::map<int, int> orbit_of_dart;                          // dart -> orbit id at tau
  std::map<int, std::string> orbit_name;
  for (int v = 0; v < t.num_vertices(); ++v) {
    std::map<int, int> local;
    for (int e : t.link(v)) {
      if (local.count(e)) continue;
      std::vector<int> orb{e};
      std::set<int> in{e};
      for (size_t h = 0; h < orb.size(); ++h)
        for (const auto& kk : kv.at(v).generators()) {
          int img = a.act_dart(kk, orb[h]);
          if (in.insert(img).second) orb.push_back(img);
        }
      std::sort(orb.begin(), orb.end());
      for (int d : orb) local[d] = (int)link_orbits[v].size();
      link_orbits[v].push_back(orb);
    }
    for (auto& [d, o] : local) orbit_of_dart[d] = o;
  }

  GraphBuilder b;
  auto t2id = [&](int v, int orbit) {
    return "(" + t.vertex_id(v) + "|" +
           t.dart_id(link_orbits.at(v)[orbit][0]) + ")";
  };
  for (int v = 0; v < t.num_vertices(); ++v) b.add_vertex(t.vertex_id(v));
  for (int v = 0; v < t.num_vertices(); ++v)
    for (size_t o = 0; o < link_orbits[v].size(); ++o)
      b.add_vertex(t2id(v, (int)o));
  int star_counter = 0;
  for (int v = 0; v < t.num_vertices(); ++v)
    for (size_t o = 0; o < link_orbits[v].size(); ++o)
      b.add_edge(t.vertex_id(v), t2id(v, (int)o),
                 "st" + std::to_string(star_counter++));
  for (int e : t.geometric_reps()) {
    int u = t.iota(e), v = t.tau(e);
    // e lies in lk(v), bar(e) in lk(u)
    b.add_edge(t2id(u, orbit_of_dart.at(t.bar(e))), t2id(v, orbit_of_dart.at(e)),
               "br:" + t.dart_id(e), "br:" + t.dart_id(t.bar(e)));
  }

  RefinedTree out;
  out.tree = b.build();
  if (!out.tree.is_tree())
    throw error(errc::not_a_tree, "refinement did not produce a tree");
  out.collapse_v.assign(out.tree.num_vertices(), -1);
  out.collapse_d.assign(out.tree.num_darts(), -1);
  out.vertex_type.assign(out.tree.num_vertices(), 0);
  for (int v = 0; v < t.num_vertices(); ++v) {
    int nv = out.tree.vertex_index(t.vertex_id(v));
    out.collapse_v[nv] = v;
    out.vertex_type[nv] = 1;
  }
  for (int v = 0; v < t.num_vertices(); ++v)
    for (size_t o = 0; o < link_orbits[v].size(); ++o) {
      int nv = out.tree.vertex_index(t2id(v, (int)o));
      out.collapse_v[nv] = v;
      out.vertex_type[nv] = 2;
    }
  for (int d = 0; d < t.num_darts(); ++d)
    out.collapse_d[out.tree.dart_index("br:" + t.dart_id(d))] = d;

  // induced action on T'
  std::vector<Perm> vgens, dgens;
  std::map<std::pair<int, int>, int> dart_at;
  for (int d = 0; d < out.tree.num_darts(); ++d)
    dart_at[{out.tree.iota(d), out.tree.tau(d)}] = d;
  for (size_t k = 0; k < a.vertex_gens().size(); ++k) {
    Perm vp(out.tree.num_vertices());
    for (int v = 0; v < t.num_vertices(); ++v)
      vp[out.tree.vertex_index(t.vertex_id(v))] =
          out.tree.vertex_index(t.vertex_id(a.vertex_gens()[k][v]));
    for (int v = 0; v < t.num_vertices(); ++v)
      for (size_t o = 0; o < link_orbits[v].size(); ++o) {
        int img_dart = a.dart_gens()[k][link_orbits[v][o][0]];
        int img_v = a.vertex_gens()[k][v];
        vp[out.tree.vertex_index(t2id(v, (int)o))] =
            out.tree.vertex_index(t2id(img_v, orbit_of_dart.at(img_dart)));
      }
    Perm dp(out.tree.num_darts());
    for (int d = 0; d < out.tree.num_darts(); ++d) {
      auto it = dart_at.find({vp[out.tree.iota(d)], vp[out.tree.tau(d)]});
      if (it == dart_at.end())
        throw error(errc::not_equivariant_family, "refined tree adjacency breaks");
      dp[d] = it->second;
    }
    vgens.push_back(std::move(vp));
    dgens.push_back(std::move(dp));
  }
  out.action = GroupAction(g, out.tree, vgens, dgens);

  // K_v fixes the refined link of v
  for (int v = 0; v < t.num_vertices(); ++v) {
    int nv = out.tree.vertex_index(t.vertex_id(v));
    for (const auto& kk : kv.at(v).generators())
      for (int e : out.tree.link(nv))
        if (out.action.act_dart(kk, e) != e)
          throw error(errc::not_equivariant_family,
                      "K_v does not fix the refined link of '" + t.vertex_id(v) + "'");
  }
  // the dart stabilizer of e embeds in the stabilizer of the inserted vertex
  for (int e = 0; e < t.num_darts(); ++e) {
    int v = t.tau(e);
    int nv = out.tree.vertex_index(t2id(v, orbit_of_dart.at(e)));
    PermGroup ge = a.dart_stabilizer(e);
    PermGroup stab = out.action.vertex_stabilizer(nv);
    if (!ge.is_subgroup_of(stab))
      throw error(errc::not_equivariant_family,
                  "dart stabilizer does not fix its inserted vertex");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Imprimitivity quotient of a blowup along an equivariant family of
// subgroups, one per tree vertex and per geometric tree edge.  Blocks are
// K_w-orbits inside the fiber over w.  Containments K_v <= K_e are required
// for every incidence; whether K_e equals the product of the endpoint
// subgroups is recorded per edge rather than enforced, since coarser edge
// families are legitimate inputs.

struct SubgroupFamily {
  std::map<int, PermGroup> vertex;  // by tree vertex
  std::map<int, PermGroup> edge;    // by geometric rep dart
};

struct BlowupQuotient {
  BlowupResult result;
  std::vector<int> block_of;             // X vertex -> Z vertex
  std::map<int, bool> edge_is_product;   // rep dart -> K_e == K_u K_v
};

inline BlowupQuotient blowup_imprimitivity_quotient(const BlowupResult& r,
                                                    const SubgroupFamily& fam) {
  const SerreGraph& t = r.tree;
  const PermGroup& g = r.action.group();
  for (int v = 0; v < t.num_vertices(); ++v)
    if (!fam.vertex.count(v))
      throw error(errc::not_equivariant_family,
                  "missing subgroup at vertex '" + t.vertex_id(v) + "'");
  for (int e : t.geometric_reps())
    if (!fam.edge.count(e))
      throw error(errc::not_equivariant_family,
                  "missing subgroup at edge '" + t.dart_id(e) + "'");

  // equivariance below covers normality in the stabilizers as a special case
  for (auto& [v, kv] : fam.vertex)
    if (!kv.is_subgroup_of(g)) throw error(errc::not_a_subgroup, "K_v");
  for (auto& [e, ke] : fam.edge)
    if (!ke.is_subgroup_of(g)) throw error(errc::not_a_subgroup, "K_e");

  // recover the tree action from the base action (original vertices embed)
  // r.base_action acts on the subdivision; vertices of T are the non-midpoint
  // base vertices with the same ids
  auto act_tree_vertex = [&](const Perm& p, int v) {
    int bv = r.base.vertex_index(t.vertex_id(v));
    int img = r.base_action.vertex_action(p)[bv];
    return t.vertex_index(r.base.vertex_id(img));
  };
  auto act_tree_rep = [&](const Perm& p, int e) {
    int bm = r.base.vertex_index(midpoint_id(t, e));
    int img = r.base_action.vertex_action(p)[bm];
    const std::string& id = r.base.vertex_id(img);
    // midpoint ids are "m:<dartid>"
    return t.rep(t.dart_index(id.substr(2)));
  };

  for (size_t k = 0; k < g.generators().size(); ++k) {
    const Perm& gen = g.generators()[k];
    for (auto& [v, kvv] : fam.vertex) {
      PermGroup conj = conjugate_subgroup(g, kvv, gen);
      const PermGroup& target = fam.vertex.at(act_tree_vertex(gen, v));
      if (conj.order() != target.order() || !conj.is_subgroup_of(target))
        throw error(errc::not_equivariant_family,
                    "vertex family breaks at '" + t.vertex_id(v) + "'");
    }
    for (auto& [e, kee] : fam.edge) {
      PermGroup conj = conjugate_subgroup(g, kee, gen);
      const PermGroup& target = fam.edge.at(act_tree_rep(gen, e));
      if (conj.order() != target.order() || !conj.is_subgroup_of(target))
        throw error(errc::not_equivariant_family,
                    "edge family breaks at '" + t.dart_id(e) + "'");
    }
  }

  // containments K_v <= K_e on incidences, product diagnostic
  BlowupQuotient out;
  for (int e : t.geometric_reps()) {
    const PermGroup& ke = fam.edge.at(e);
    const PermGroup& ku = fam.vertex.at(t.iota(e));
    const PermGroup& kvv = fam.vertex.at(t.tau(e));
    if (!ku.is_subgroup_of(ke) || !kvv.is_subgroup_of(ke))
      throw error(errc::containment_violated,
                  "K_v is not contained in K_e at edge '" + t.dart_id(e) + "'");
    auto prod = product_set_subgroup(g, ku, kvv);
    out.edge_is_product[e] = prod.has_value() && prod->order() == ke.order() &&
                             prod->is_subgroup_of(ke);
  }

  // blocks: K_w-orbits inside each fiber
  std::vector<int> owner(r.x.num_vertices());  // base vertex of each X vertex
  std::vector<int> block(r.x.num_vertices(), -1);
  int nblocks = 0;
  for (int xv = 0; xv < r.x.num_vertices(); ++xv) owner[xv] = r.p_vertex[xv];
  for (int xv = 0; xv < r.x.num_vertices(); ++xv) {
    if (block[xv] >= 0) continue;
    const std::string& bid = r.base.vertex_id(owner[xv]);
    const PermGroup* kw = nullptr;
    if (bid.rfind("m:", 0) == 0)
      kw = &fam.edge.at(t.rep(t.dart_index(bid.substr(2))));
    else
      kw = &fam.vertex.at(t.vertex_index(bid));
    std::vector<int> orb{xv};
    std::set<int> in{xv};
    for (size_t h = 0; h < orb.size(); ++h)
      for (const auto& kk : kw->generators()) {
        int img = r.action.act_vertex(kk, orb[h]);
        if (in.insert(img).second) orb.push_back(img);
      }
    for (int y : orb) {
      if (owner[y] != owner[xv])
        throw error(errc::not_invariant, "K_w moves a fiber off itself");
      block[y] = nblocks;
    }
    ++nblocks;
  }
  auto partition = VertexPartition::from_block_of(block);
  std::string wit;
  if (!r.action.preserves_partition(partition, &wit))
    throw error(errc::not_equivariant_family, "quotient blocks are not invariant: " + wit);

  auto q = quotient_by_partition(r.x, partition, false);

  BlowupResult z;
  z.x = q.graph;
  z.tree = r.tree;
  z.base = r.base;
  z.base_action = r.base_action;
  z.coset_count = -1;
  z.omega_size = r.omega_size;
  z.p_vertex.assign(z.x.num_vertices(), -1);
  for (int xv = 0; xv < r.x.num_vertices(); ++xv)
    z.p_vertex[q.vmap[xv]] = r.p_vertex[xv];
  z.edge_type.assign(z.x.num_darts(), 0);
  z.p_dart.assign(z.x.num_darts(), -1);
  std::map<std::pair<int, int>, int> base_dart_at;
  for (int d = 0; d < r.base.num_darts(); ++d)
    base_dart_at[{r.base.iota(d), r.base.tau(d)}] = d;
  for (int d = 0; d < z.x.num_darts(); ++d) {
    int pu = z.p_vertex[z.x.iota(d)], pv = z.p_vertex[z.x.tau(d)];
    if (pu == pv) {
      z.edge_type[d] = 1;
    } else {
      z.edge_type[d] = 2;
      auto it = base_dart_at.find({pu, pv});
      if (it == base_dart_at.end())
        throw error(errc::not_invariant, "quotient dart does not project");
      z.p_dart[d] = it->second;
    }
  }
  // induced action on Z
  std::vector<Perm> vgens, dgens;
  std::map<std::pair<int, int>, int> zdart_at;
  for (int d = 0; d < z.x.num_darts(); ++d)
    zdart_at[{z.x.iota(d), z.x.tau(d)}] = d;
  for (size_t k = 0; k < g.generators().size(); ++k) {
    Perm vp(z.x.num_vertices());
    for (int b = 0; b < partition.num_blocks(); ++b) {
      int rep0 = partition.blocks[b][0];
      vp[q.vmap[rep0]] = q.vmap[r.action.vertex_gens()[k][rep0]];
    }
    Perm dp(z.x.num_darts());
    for (int d = 0; d < z.x.num_darts(); ++d) {
      auto it = zdart_at.find({vp[z.x.iota(d)], vp[z.x.tau(d)]});
      if (it == zdart_at.end())
        throw error(errc::not_invariant, "quotient adjacency is not invariant");
      dp[d] = it->second;
    }
    vgens.push_back(std::move(vp));
    dgens.push_back(std::move(dp));
  }
  z.action = GroupAction(g, z.x, vgens, dgens);

  // K_v acts trivially on the fiber-star of v in Z
  for (int v = 0; v < t.num_vertices(); ++v) {
    std::set<int> star_bases{z.base.vertex_index(t.vertex_id(v))};
    for (int e : t.link(v)) star_bases.insert(z.base.vertex_index(midpoint_id(t, t.rep(e))));
    for (const auto& kk : fam.vertex.at(v).generators())
      for (int zv = 0; zv < z.x.num_vertices(); ++zv)
        if (star_bases.count(z.p_vertex[zv]) && z.action.act_vertex(kk, zv) != zv)
          throw error(errc::containment_violated,
                      "K_v moves the fiber-star of '" + t.vertex_id(v) + "'");
  }

  out.result = std::move(z);
  out.block_of = q.vmap;
  return out;
}

// Extends subgroup data given on orbit representatives to the whole tree by
// conjugation; errors if the seed data is not well-defined.
inline SubgroupFamily extend_family(const BlowupResult& r,
                                    const std::map<int, PermGroup>& vertex_seed,
                                    const std::map<int, PermGroup>& edge_seed) {
  const SerreGraph& t = r.tree;
  const PermGroup& g = r.action.group();
  const auto& table = r.base_action.table();
  SubgroupFamily fam;
  auto base_of_vertex = [&](int v) { return r.base.vertex_index(t.vertex_id(v)); };
  auto vertex_of_base = [&](int b) { return t.vertex_index(r.base.vertex_id(b)); };
  auto base_of_rep = [&](int e) { return r.base.vertex_index(midpoint_id(t, e)); };
  auto rep_of_base = [&](int b) {
    return t.rep(t.dart_index(r.base.vertex_id(b).substr(2)));
  };
  for (auto& [v, kv] : vertex_seed) {
    for (size_t i = 0; i < table.el.size(); ++i) {
      int img = vertex_of_base(table.vp[i][base_of_vertex(v)]);
      PermGroup conj = g.spanned_by([&] {
        std::vector<Perm> cs;
        for (const auto& kk : kv.elements()) cs.push_back(gconj(table.el[i], kk));
        return cs;
      }());
      auto it = fam.vertex.find(img);
      if (it == fam.vertex.end())
        fam.vertex.emplace(img, conj);
      else if (it->second.order() != conj.order() || !conj.is_subgroup_of(it->second))
        throw error(errc::not_equivariant_family,
                    "seed subgroup at '" + t.vertex_id(v) + "' is not normal enough");
    }
  }
  for (auto& [e, ke] : edge_seed) {
    for (size_t i = 0; i < table.el.size(); ++i) {
      int img = rep_of_base(table.vp[i][base_of_rep(e)]);
      PermGroup conj = g.spanned_by([&] {
        std::vector<Perm> cs;
        for (const auto& kk : ke.elements()) cs.push_back(gconj(table.el[i], kk));
        return cs;
      }());
      auto it = fam.edge.find(img);
      if (it == fam.edge.end())
        fam.edge.emplace(img, conj);
      else if (it->second.order() != conj.order() || !conj.is_subgroup_of(it->second))
        throw error(errc::not_equivariant_family,
                    "seed subgroup at edge '" + t.dart_id(e) + "' is not normal enough");
    }
  }
  return fam;
}

}  // namespace serre
