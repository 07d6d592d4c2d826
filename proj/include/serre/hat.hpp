#pragma once
// The hat-cover pipeline: per-vertex automorphism data with two free lattice
// images and chosen normal subgroups, verified against the common-cover,
// equivariance and gluing conditions, then glued into quotient pieces and a
// tree-of-spaces ball with fiber-product checks at interior vertices.
// Commanding data arrives as explicit input; nothing here derives it.

#include "serre/gos.hpp"
#include "serre/leighton.hpp"

namespace serre {

// ---------------------------------------------------------------------------
// Deck transformations of a plain graph covering, by unique lifting.

struct GraphDeck {
  std::vector<GraphMap> elements;
  bool regular = false;
};

inline GraphDeck graph_deck_group(const GraphMorphism& f) {
  auto cov = is_covering(f);
  if (!cov.covering)
    throw error(errc::invalid_argument, "deck group needs a covering: " + cov.witness);
  GraphDeck out;
  const SerreGraph& g = f.source;
  if (g.num_vertices() == 0) {
    out.regular = true;
    return out;
  }
  if (!g.is_connected())
    throw error(errc::invalid_argument, "deck group needs a connected cover");
  std::vector<int> fiber;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (f.vmap[v] == f.vmap[0]) fiber.push_back(v);
  for (int w0 : fiber) {
    // try to extend v0 -> w0 by unique lifting
    std::vector<int> vm(g.num_vertices(), -1), dm(g.num_darts(), -1);
    vm[0] = w0;
    std::queue<int> q;
    q.push(0);
    bool ok = true;
    while (!q.empty() && ok) {
      int v = q.front();
      q.pop();
      int w = vm[v];
      // at w, each base dart has a unique preimage in lk(w)
      std::map<int, int> lift_at_w;
      for (int e : g.link(w)) lift_at_w[f.dmap[e]] = e;
      for (int e : g.link(v)) {
        int img = lift_at_w.count(f.dmap[e]) ? lift_at_w[f.dmap[e]] : -1;
        if (img < 0) {
          ok = false;
          break;
        }
        if (dm[e] >= 0 && dm[e] != img) {
          ok = false;
          break;
        }
        if (dm[e] < 0) {
          dm[e] = img;
          dm[g.bar(e)] = g.bar(img);
          int u = g.iota(e);
          int uu = g.iota(img);
          if (vm[u] < 0) {
            vm[u] = uu;
            q.push(u);
          } else if (vm[u] != uu) {
            ok = false;
            break;
          }
        }
      }
    }
    if (!ok) continue;
    bool total = true;
    for (int v = 0; v < g.num_vertices(); ++v)
      if (vm[v] < 0) total = false;
    for (int d = 0; d < g.num_darts(); ++d)
      if (dm[d] < 0) total = false;
    if (!total) continue;
    if (!perm_is_bijection(vm) || !perm_is_bijection(dm)) continue;
    // must commute with f
    bool commutes = true;
    for (int v = 0; v < g.num_vertices() && commutes; ++v)
      if (f.vmap[vm[v]] != f.vmap[v]) commutes = false;
    for (int d = 0; d < g.num_darts() && commutes; ++d)
      if (f.dmap[dm[d]] != f.dmap[d]) commutes = false;
    if (!commutes) continue;
    out.elements.push_back({vm, dm});
  }
  out.regular = (long long)out.elements.size() == cov.degree;
  return out;
}

// ---------------------------------------------------------------------------
// Input data: a graph of spaces whose vertex spaces carry localized groups,
// two free lattice images, and chosen normal subgroups; edge spaces carry
// their localized groups.  All groups are permutation groups over the
// vertices-and-darts domain of their piece.

struct HatCoverData {
  GraphOfSpaces y;
  std::vector<PermGroup> q_v;       // per underlying vertex, <= Aut(X_v)
  std::vector<PermGroup> gamma1_v;  // free lattice images, <= Q_v
  std::vector<PermGroup> gamma2_v;
  std::vector<PermGroup> qhat_v;    // chosen normal subgroups of Q_v
  std::vector<PermGroup> q_e;       // per edge space, <= Aut(X_e)
};

struct HatCheck {
  std::string clause;
  bool ok = true;
  std::string witness;
};

struct HatGlueResult {
  std::vector<HatCheck> checks;
  std::vector<SerreGraph> hat_vertex;           // X_v / Qhat_v
  std::vector<GraphMorphism> hat_vertex_proj;   // X_v -> hat
  std::vector<SerreGraph> hat_edge;             // X_e / Qhat_e, per edge space
  std::vector<GraphMorphism> hat_edge_proj;
  std::vector<PermGroup> qhat_e;                // per edge space
  std::vector<GraphMorphism> embeddings;        // per dart: hat_edge -> hat_vertex(tau)
  std::vector<SerreGraph> base1, base2;         // X_v/Gamma, X_v/Gamma'
  std::vector<GraphMorphism> cover1, cover2;    // hat_vertex -> bases (verified regular)
  std::vector<long long> deck1_order, deck2_order;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }
};

namespace detail {

inline void require_graph_subgroup(const SerreGraph& x, const PermGroup& g,
                                   const std::string& who) {
  if (g.domain() != aut_domain(x))
    throw error(errc::invalid_argument, who + " must act on the piece's domain");
  for (const auto& p : g.generators()) {
    GraphMap m = domain_perm_to_graphmap(x, p);
    if (!perm_is_bijection(m.v) || !perm_is_bijection(m.d))
      throw error(errc::invalid_argument, who + " generator is not a bijection");
    for (int d = 0; d < x.num_darts(); ++d)
      if (m.d[x.bar(d)] != x.bar(m.d[d]) || m.v[x.iota(d)] != x.iota(m.d[d]) ||
          m.v[x.tau(d)] != x.tau(m.d[d]))
        throw error(errc::invalid_argument, who + " generator is not an automorphism");
  }
}

// free = no fixed vertices and no dart inversions for nonidentity elements
inline bool acts_freely(const SerreGraph& x, const PermGroup& g, std::string* wit) {
  for (const auto& p : g.elements()) {
    if (perm_is_identity(p)) continue;
    GraphMap m = domain_perm_to_graphmap(x, p);
    for (int v = 0; v < x.num_vertices(); ++v)
      if (m.v[v] == v) {
        if (wit) *wit = "fixed vertex '" + x.vertex_id(v) + "'";
        return false;
      }
    for (int d = 0; d < x.num_darts(); ++d)
      if (m.d[d] == x.bar(d)) {
        if (wit) *wit = "inverted dart '" + x.dart_id(d) + "'";
        return false;
      }
  }
  return true;
}

inline FreeQuotientResult free_quotient_by(const SerreGraph& x, const PermGroup& g) {
  std::vector<std::vector<int>> vs, ds;
  for (const auto& p : g.generators()) {
    GraphMap m = domain_perm_to_graphmap(x, p);
    vs.push_back(m.v);
    ds.push_back(m.d);
  }
  return quotient_by_free_action(x, vs, ds);
}

// setwise stabilizer of the attachment image of dart e inside Q_v
inline PermGroup marked_stabilizer(const GraphOfSpaces& y, const PermGroup& qv, int e) {
  const SerreGraph& xv = y.vertex_space(y.underlying().tau(e));
  std::vector<char> in(xv.num_vertices(), 0);
  for (int x : y.attach_vmap(e)) in[x] = 1;
  std::vector<Perm> keep;
  for (const auto& p : qv.elements()) {
    GraphMap m = domain_perm_to_graphmap(xv, p);
    bool ok = true;
    for (int x : y.attach_vmap(e))
      if (!in[m.v[x]]) {
        ok = false;
        break;
      }
    if (ok) keep.push_back(p);
  }
  return qv.spanned_by(keep);
}

// restriction of a marked-image stabilizer element to the edge space
inline Perm restrict_to_edge(const GraphOfSpaces& y, int e, const Perm& q) {
  const SerreGraph& xv = y.vertex_space(y.underlying().tau(e));
  const SerreGraph& xe = y.edge_space_of(e);
  GraphMap m = domain_perm_to_graphmap(xv, q);
  std::vector<int> inv_v(xv.num_vertices(), -1), inv_d(xv.num_darts(), -1);
  for (int x = 0; x < xe.num_vertices(); ++x) inv_v[y.attach_vmap(e)[x]] = x;
  for (int x = 0; x < xe.num_darts(); ++x) inv_d[y.attach_dmap(e)[x]] = x;
  GraphMap r;
  r.v.resize(xe.num_vertices());
  r.d.resize(xe.num_darts());
  for (int x = 0; x < xe.num_vertices(); ++x) {
    int img = inv_v[m.v[y.attach_vmap(e)[x]]];
    if (img < 0)
      throw error(errc::invalid_argument, "element does not stabilize the image");
    r.v[x] = img;
  }
  for (int x = 0; x < xe.num_darts(); ++x) {
    int img = inv_d[m.d[y.attach_dmap(e)[x]]];
    if (img < 0)
      throw error(errc::invalid_argument, "element does not stabilize the image");
    r.d[x] = img;
  }
  return graphmap_to_domain_perm(xe, r);
}

}  // namespace detail

// non-throwing verification of the three named conditions
inline std::vector<HatCheck> verify_hat_conditions(const HatCoverData& data) {
  std::vector<HatCheck> checks;
  const SerreGraph& u = data.y.underlying();
  auto fail = [&](const std::string& clause, const std::string& wit) {
    checks.push_back({clause, false, wit});
  };
  auto pass = [&](const std::string& clause) { checks.push_back({clause, true, ""}); };

  // structural sanity
  if ((int)data.q_v.size() != u.num_vertices() ||
      (int)data.gamma1_v.size() != u.num_vertices() ||
      (int)data.gamma2_v.size() != u.num_vertices() ||
      (int)data.qhat_v.size() != u.num_vertices() ||
      (int)data.q_e.size() != data.y.num_edge_spaces())
    throw error(errc::invalid_argument, "group tables do not match the pieces");
  for (int v = 0; v < u.num_vertices(); ++v) {
    detail::require_graph_subgroup(data.y.vertex_space(v), data.q_v[v], "Q_v");
    detail::require_graph_subgroup(data.y.vertex_space(v), data.gamma1_v[v], "Gamma_v");
    detail::require_graph_subgroup(data.y.vertex_space(v), data.gamma2_v[v], "Gamma'_v");
    detail::require_graph_subgroup(data.y.vertex_space(v), data.qhat_v[v], "Qhat_v");
  }
  for (int i = 0; i < data.y.num_edge_spaces(); ++i)
    detail::require_graph_subgroup(data.y.edge_space(i), data.q_e[i], "Q_e");

  // (1) vertex space common covers: Qhat_v normal in Q_v, inside both
  // lattice images, which act freely
  {
    bool ok = true;
    std::string wit;
    for (int v = 0; v < u.num_vertices() && ok; ++v) {
      const std::string id = u.vertex_id(v);
      if (!data.gamma1_v[v].is_subgroup_of(data.q_v[v]) ||
          !data.gamma2_v[v].is_subgroup_of(data.q_v[v])) {
        ok = false;
        wit = "lattice image at '" + id + "' is not inside Q_v";
        break;
      }
      std::string fw;
      if (!detail::acts_freely(data.y.vertex_space(v), data.gamma1_v[v], &fw) ||
          !detail::acts_freely(data.y.vertex_space(v), data.gamma2_v[v], &fw)) {
        ok = false;
        wit = "lattice image at '" + id + "' does not act freely: " + fw;
        break;
      }
      if (!data.qhat_v[v].is_subgroup_of(data.gamma1_v[v]) ||
          !data.qhat_v[v].is_subgroup_of(data.gamma2_v[v])) {
        ok = false;
        wit = "Qhat at '" + id + "' is not inside both lattice images";
        break;
      }
    }
    if (ok)
      pass("VertexSpaceCommonCovers");
    else
      fail("VertexSpaceCommonCovers", wit);
  }

  // (2) equivariance: Qhat_v normal in Q_v and restrictions land in Q_e
  {
    bool ok = true;
    std::string wit;
    for (int v = 0; v < u.num_vertices() && ok; ++v) {
      if (!data.qhat_v[v].is_subgroup_of(data.q_v[v]) ||
          !is_normal_in(data.q_v[v], data.qhat_v[v])) {
        ok = false;
        wit = "Qhat at '" + u.vertex_id(v) + "' is not normal in Q_v";
        break;
      }
    }
    for (int e = 0; e < u.num_darts() && ok; ++e) {
      PermGroup qve = detail::marked_stabilizer(data.y, data.q_v[u.tau(e)], e);
      for (const auto& p : qve.elements()) {
        Perm r = detail::restrict_to_edge(data.y, e, p);
        if (!data.q_e[data.y.edge_space_index(e)].contains(r)) {
          ok = false;
          wit = "restriction along dart '" + u.dart_id(e) + "' leaves Q_e";
          break;
        }
      }
    }
    if (ok)
      pass("Equivariance");
    else
      fail("Equivariance", wit);
  }

  // (3) gluing: the two restrictions of Qhat agree on every geometric edge
  // and are injective
  {
    bool ok = true;
    std::string wit;
    for (int e : u.geometric_reps()) {
      int eb = u.bar(e);
      int vv = u.tau(e), uu = u.tau(eb);
      PermGroup qve = detail::marked_stabilizer(data.y, data.q_v[vv], e);
      PermGroup qub = detail::marked_stabilizer(data.y, data.q_v[uu], eb);
      PermGroup hat_v = subgroup_intersection(data.q_v[vv], data.qhat_v[vv], qve);
      PermGroup hat_u = subgroup_intersection(data.q_v[uu], data.qhat_v[uu], qub);
      std::set<Perm> img_v, img_u;
      for (const auto& p : hat_v.elements())
        img_v.insert(detail::restrict_to_edge(data.y, e, p));
      for (const auto& p : hat_u.elements())
        img_u.insert(detail::restrict_to_edge(data.y, eb, p));
      if ((long long)img_v.size() != hat_v.order() ||
          (long long)img_u.size() != hat_u.order()) {
        ok = false;
        wit = "restriction is not injective on edge '" + u.dart_id(e) + "'";
        break;
      }
      if (img_v != img_u) {
        ok = false;
        wit = "restricted subgroups differ on edge '" + u.dart_id(e) + "'";
        break;
      }
    }
    if (ok)
      pass("GluingCondition");
    else
      fail("GluingCondition", wit);
  }
  return checks;
}

inline HatGlueResult verify_and_glue_hat(const HatCoverData& data) {
  HatGlueResult out;
  out.checks = verify_hat_conditions(data);
  for (const auto& c : out.checks) {
    if (c.ok) continue;
    if (c.clause == "GluingCondition") throw error(errc::gluing_mismatch, c.witness);
    if (c.clause == "Equivariance") throw error(errc::not_normal, c.witness);
    if (c.witness.find("freely") != std::string::npos)
      throw error(errc::not_free, c.witness);
    throw error(errc::not_a_subgroup, c.clause + ": " + c.witness);
  }
  const SerreGraph& u = data.y.underlying();

  for (int v = 0; v < u.num_vertices(); ++v) {
    auto q = detail::free_quotient_by(data.y.vertex_space(v), data.qhat_v[v]);
    out.hat_vertex.push_back(q.graph);
    out.hat_vertex_proj.push_back(q.projection);
  }

  // Qhat_e per edge space: image of either side's restriction
  out.qhat_e.resize(data.y.num_edge_spaces(),
                    PermGroup::trivial({"unset"}));
  for (int e : u.geometric_reps()) {
    int vv = u.tau(e);
    PermGroup qve = detail::marked_stabilizer(data.y, data.q_v[vv], e);
    PermGroup hat_ve = subgroup_intersection(data.q_v[vv], data.qhat_v[vv], qve);
    std::vector<Perm> img;
    for (const auto& p : hat_ve.elements())
      img.push_back(detail::restrict_to_edge(data.y, e, p));
    int ei = data.y.edge_space_index(e);
    out.qhat_e[ei] = data.q_e[ei].spanned_by(img);
    std::string fw;
    if (!detail::acts_freely(data.y.edge_space(ei), out.qhat_e[ei], &fw))
      throw error(errc::not_free, "Qhat_e on edge '" + u.dart_id(e) + "': " + fw);
    auto q = detail::free_quotient_by(data.y.edge_space(ei), out.qhat_e[ei]);
    out.hat_edge.push_back(q.graph);
    out.hat_edge_proj.push_back(q.projection);
  }

  // embeddings hat_edge -> hat_vertex along every dart
  for (int e = 0; e < u.num_darts(); ++e) {
    int ei = data.y.edge_space_index(e);
    int vv = u.tau(e);
    const SerreGraph& he = out.hat_edge[ei];
    const SerreGraph& hv = out.hat_vertex[vv];
    const SerreGraph& xe = data.y.edge_space(ei);
    std::vector<int> vm(he.num_vertices(), -1), dm(he.num_darts(), -1);
    for (int x = 0; x < xe.num_vertices(); ++x) {
      int target = out.hat_vertex_proj[vv].vmap[data.y.attach_vmap(e)[x]];
      int src = out.hat_edge_proj[ei].vmap[x];
      if (vm[src] >= 0 && vm[src] != target)
        throw error(errc::gluing_mismatch,
                    "edge-space quotient does not match the image quotient at dart '" +
                        u.dart_id(e) + "'");
      vm[src] = target;
    }
    for (int x = 0; x < xe.num_darts(); ++x) {
      int target = out.hat_vertex_proj[vv].dmap[data.y.attach_dmap(e)[x]];
      int src = out.hat_edge_proj[ei].dmap[x];
      if (dm[src] >= 0 && dm[src] != target)
        throw error(errc::gluing_mismatch,
                    "edge-space quotient does not match the image quotient at dart '" +
                        u.dart_id(e) + "'");
      dm[src] = target;
    }
    // injectivity
    {
      std::set<int> seen;
      for (int x : vm)
        if (!seen.insert(x).second)
          throw error(errc::gluing_mismatch,
                      "quotient embedding is not injective at dart '" +
                          u.dart_id(e) + "'");
    }
    out.embeddings.push_back(GraphMorphism::validate(he, hv, vm, dm));
  }

  // regular covers of both lattice quotients
  for (int v = 0; v < u.num_vertices(); ++v) {
    for (int side = 0; side < 2; ++side) {
      const PermGroup& gamma = side == 0 ? data.gamma1_v[v] : data.gamma2_v[v];
      auto q = detail::free_quotient_by(data.y.vertex_space(v), gamma);
      std::vector<int> vm(out.hat_vertex[v].num_vertices(), -1);
      std::vector<int> dm(out.hat_vertex[v].num_darts(), -1);
      for (int x = 0; x < data.y.vertex_space(v).num_vertices(); ++x)
        vm[out.hat_vertex_proj[v].vmap[x]] = q.projection.vmap[x];
      for (int x = 0; x < data.y.vertex_space(v).num_darts(); ++x)
        dm[out.hat_vertex_proj[v].dmap[x]] = q.projection.dmap[x];
      auto cover = GraphMorphism::validate(out.hat_vertex[v], q.graph, vm, dm);
      auto rep = is_covering(cover);
      if (!rep.covering)
        throw error(errc::not_free,
                    "hat cover over '" + u.vertex_id(v) + "' failed: " + rep.witness);
      auto deck = graph_deck_group(cover);
      if (!deck.regular)
        throw error(errc::not_normal,
                    "hat cover over '" + u.vertex_id(v) + "' is not regular");
      if (side == 0) {
        out.base1.push_back(q.graph);
        out.cover1.push_back(cover);
        out.deck1_order.push_back((long long)deck.elements.size());
      } else {
        out.base2.push_back(q.graph);
        out.cover2.push_back(cover);
        out.deck2_order.push_back((long long)deck.elements.size());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The radius-r ball of the glued tree of spaces: one edge per Qhat_v-orbit
// of attachment-image copies in each link, pieces from the glue step.
// Interior vertices are checked against both lattice quotients via the
// fiber-product criterion.

struct HatBall {
  GraphOfSpaces ball;
  std::vector<int> node_lambda;  // per ball vertex: underlying vertex of the data
  std::vector<int> node_depth;
  std::vector<int> boundary;     // ball vertices at the radius
  std::vector<HatCheck> interior_checks;
  bool interior_ok = true;
};

namespace detail {

struct ImageCopy {
  std::vector<int> set;  // sorted vertex set in X_v
  Perm q;                // an element of Q_v carrying the attachment image here
};

// Q_v-orbit of the marked image of dart e, with chosen carriers
inline std::vector<ImageCopy> image_copies(const HatCoverData& data, int e) {
  const SerreGraph& u = data.y.underlying();
  int v = u.tau(e);
  const SerreGraph& xv = data.y.vertex_space(v);
  std::map<std::vector<int>, Perm> seen;
  for (const auto& p : data.q_v[v].elements()) {
    GraphMap m = domain_perm_to_graphmap(xv, p);
    std::vector<int> img;
    for (int x : data.y.attach_vmap(e)) img.push_back(m.v[x]);
    std::sort(img.begin(), img.end());
    seen.emplace(std::move(img), p);  // keeps the least element per copy
  }
  std::vector<ImageCopy> out;
  for (auto& [set, p] : seen) out.push_back({set, p});
  return out;
}

// Qhat_v-orbits on the copies; each orbit holds copy indices, the
// representative preferring the identity carrier
struct CopyOrbit {
  std::vector<int> members;
  int rep = -1;
  bool has_identity = false;
};

inline std::vector<CopyOrbit> copy_orbits(const HatCoverData& data, int e,
                                          const std::vector<ImageCopy>& copies) {
  const SerreGraph& u = data.y.underlying();
  int v = u.tau(e);
  const SerreGraph& xv = data.y.vertex_space(v);
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < (int)copies.size(); ++i) index[copies[i].set] = i;
  std::vector<int> ident;
  {
    std::vector<int> img = data.y.attach_vmap(e);
    std::sort(img.begin(), img.end());
    ident = img;
  }
  std::vector<int> orbit_of(copies.size(), -1);
  std::vector<CopyOrbit> orbits;
  for (int i = 0; i < (int)copies.size(); ++i) {
    if (orbit_of[i] >= 0) continue;
    CopyOrbit orb;
    std::vector<int> queue{i};
    orbit_of[i] = (int)orbits.size();
    while (!queue.empty()) {
      int c = queue.back();
      queue.pop_back();
      orb.members.push_back(c);
      for (const auto& h : data.qhat_v[v].generators()) {
        GraphMap m = domain_perm_to_graphmap(xv, h);
        std::vector<int> img;
        for (int x : copies[c].set) img.push_back(m.v[x]);
        std::sort(img.begin(), img.end());
        int j = index.at(img);
        if (orbit_of[j] < 0) {
          orbit_of[j] = (int)orbits.size();
          queue.push_back(j);
        }
      }
    }
    std::sort(orb.members.begin(), orb.members.end());
    orb.rep = orb.members[0];
    for (int c : orb.members)
      if (copies[c].set == ident) {
        orb.rep = c;
        orb.has_identity = true;
      }
    orbits.push_back(std::move(orb));
  }
  return orbits;
}

struct UnionParts {
  SerreGraph graph;
  std::vector<std::vector<int>> vin, din;  // per part: part index -> union index
};

inline UnionParts union_many(const std::vector<const SerreGraph*>& parts) {
  GraphData data;
  for (size_t i = 0; i < parts.size(); ++i) {
    std::string pre = "P" + std::to_string(i) + ":";
    for (const auto& id : parts[i]->vertex_ids()) data.vertices.push_back(pre + id);
    for (int d = 0; d < parts[i]->num_darts(); ++d)
      data.darts.push_back({pre + parts[i]->dart_id(d),
                            pre + parts[i]->dart_id(parts[i]->bar(d)),
                            pre + parts[i]->vertex_id(parts[i]->iota(d)),
                            pre + parts[i]->vertex_id(parts[i]->tau(d))});
  }
  UnionParts out;
  out.graph = SerreGraph::validate(data);
  for (size_t i = 0; i < parts.size(); ++i) {
    std::string pre = "P" + std::to_string(i) + ":";
    std::vector<int> vm(parts[i]->num_vertices()), dm(parts[i]->num_darts());
    for (int v = 0; v < parts[i]->num_vertices(); ++v)
      vm[v] = out.graph.vertex_index(pre + parts[i]->vertex_id(v));
    for (int d = 0; d < parts[i]->num_darts(); ++d)
      dm[d] = out.graph.dart_index(pre + parts[i]->dart_id(d));
    out.vin.push_back(std::move(vm));
    out.din.push_back(std::move(dm));
  }
  return out;
}

}  // namespace detail

inline HatBall assemble_hat_ball(const HatCoverData& data, int radius,
                                 int base_vertex = 0) {
  auto glue = verify_and_glue_hat(data);
  const SerreGraph& u = data.y.underlying();
  if (base_vertex < 0 || base_vertex >= u.num_vertices())
    throw error(errc::invalid_argument, "base vertex out of range");

  // per-dart copy and orbit data, computed on demand
  std::map<int, std::vector<detail::ImageCopy>> copies;
  std::map<int, std::vector<detail::CopyOrbit>> orbits;
  auto get_copies = [&](int e) -> const std::vector<detail::ImageCopy>& {
    auto it = copies.find(e);
    if (it == copies.end())
      it = copies.emplace(e, detail::image_copies(data, e)).first;
    return it->second;
  };
  auto get_orbits = [&](int e) -> const std::vector<detail::CopyOrbit>& {
    auto it = orbits.find(e);
    if (it == orbits.end())
      it = orbits.emplace(e, detail::copy_orbits(data, e, get_copies(e))).first;
    return it->second;
  };

  struct Node {
    int lambda_v;
    int depth;
    int in_dart = -1;  // lambda dart whose tau is this node's vertex (from parent)
  };
  struct BallEdge {
    int parent, child;
    int lambda_dart;  // tau side = parent
    Perm q;           // carrier of the copy at the parent side
  };
  std::vector<Node> nodes{{base_vertex, 0, -1}};
  std::vector<BallEdge> edges;
  for (size_t head = 0; head < nodes.size(); ++head) {
    Node node = nodes[head];
    if (node.depth >= radius) continue;
    for (int e : u.link(node.lambda_v)) {
      const auto& orbs = get_orbits(e);
      for (size_t oi = 0; oi < orbs.size(); ++oi) {
        if (node.in_dart == e && orbs[oi].has_identity) continue;  // came from here
        const auto& copy = get_copies(e)[orbs[oi].rep];
        int child = (int)nodes.size();
        nodes.push_back({u.iota(e), node.depth + 1, u.bar(e)});
        edges.push_back({(int)head, child, e, copy.q});
      }
    }
  }

  GraphBuilder tb;
  for (size_t i = 0; i < nodes.size(); ++i) tb.add_vertex("n" + std::to_string(i));
  for (size_t j = 0; j < edges.size(); ++j)
    tb.add_edge("n" + std::to_string(edges[j].parent),
                "n" + std::to_string(edges[j].child), "be" + std::to_string(j));
  SerreGraph tree = tb.build();

  std::vector<SerreGraph> vspaces;
  std::vector<int> node_lambda, node_depth;
  for (const auto& n : nodes) {
    vspaces.push_back(glue.hat_vertex[n.lambda_v]);
    node_lambda.push_back(n.lambda_v);
    node_depth.push_back(n.depth);
  }
  auto reps = tree.geometric_reps();
  std::vector<SerreGraph> espaces;
  std::vector<std::vector<int>> attach_v(tree.num_darts()), attach_d(tree.num_darts());
  // metadata per tree dart: the lambda dart and carrier for the side at tau
  std::vector<int> side_lambda(tree.num_darts(), -1);
  std::vector<Perm> side_q(tree.num_darts());
  for (size_t j = 0; j < edges.size(); ++j) {
    const BallEdge& be = edges[j];
    int dart_pc = tree.dart_index("be" + std::to_string(j));  // parent -> child
    int dart_cp = tree.bar(dart_pc);
    int ei = data.y.edge_space_index(be.lambda_dart);
    espaces.push_back(glue.hat_edge[ei]);  // aligned with rep order below
    const SerreGraph& he = glue.hat_edge[ei];
    const SerreGraph& xe = data.y.edge_space(ei);
    // near side: into the parent piece, through the carrier q
    {
      int v = u.tau(be.lambda_dart);
      const SerreGraph& xv = data.y.vertex_space(v);
      GraphMap mq = domain_perm_to_graphmap(xv, be.q);
      std::vector<int> vm(he.num_vertices(), -1), dm(he.num_darts(), -1);
      for (int x = 0; x < xe.num_vertices(); ++x) {
        int src = glue.hat_edge_proj[ei].vmap[x];
        int tgt = glue.hat_vertex_proj[v].vmap[mq.v[data.y.attach_vmap(be.lambda_dart)[x]]];
        if (vm[src] >= 0 && vm[src] != tgt)
          throw error(errc::gluing_mismatch, "ball attachment is inconsistent");
        vm[src] = tgt;
      }
      for (int x = 0; x < xe.num_darts(); ++x) {
        int src = glue.hat_edge_proj[ei].dmap[x];
        int tgt = glue.hat_vertex_proj[v].dmap[mq.d[data.y.attach_dmap(be.lambda_dart)[x]]];
        if (dm[src] >= 0 && dm[src] != tgt)
          throw error(errc::gluing_mismatch, "ball attachment is inconsistent");
        dm[src] = tgt;
      }
      attach_v[dart_cp] = vm;  // tau(dart_cp) = parent
      attach_d[dart_cp] = dm;
      side_lambda[dart_cp] = be.lambda_dart;
      side_q[dart_cp] = be.q;
    }
    // far side: canonical embedding into the child piece
    {
      int eb = u.bar(be.lambda_dart);
      int vv = u.tau(eb);
      std::vector<int> vm(he.num_vertices(), -1), dm(he.num_darts(), -1);
      for (int x = 0; x < xe.num_vertices(); ++x) {
        int src = glue.hat_edge_proj[ei].vmap[x];
        vm[src] = glue.hat_vertex_proj[vv].vmap[data.y.attach_vmap(eb)[x]];
      }
      for (int x = 0; x < xe.num_darts(); ++x) {
        int src = glue.hat_edge_proj[ei].dmap[x];
        dm[src] = glue.hat_vertex_proj[vv].dmap[data.y.attach_dmap(eb)[x]];
      }
      attach_v[dart_pc] = vm;  // tau(dart_pc) = child
      attach_d[dart_pc] = dm;
      side_lambda[dart_pc] = eb;
      side_q[dart_pc] = perm_identity((int)aut_domain(data.y.vertex_space(vv)).size());
    }
  }
  // align edge spaces with the geometric rep order of the tree
  {
    std::vector<SerreGraph> ordered;
    for (int r : reps) {
      // rep darts are "be<j>" in insertion order
      const std::string& id = tree.dart_id(r);
      int j = std::stoi(id.substr(2));
      ordered.push_back(glue.hat_edge[data.y.edge_space_index(edges[j].lambda_dart)]);
    }
    espaces = std::move(ordered);
  }

  HatBall out;
  out.ball = GraphOfSpaces::validate(tree, vspaces, espaces, attach_v, attach_d);
  out.node_lambda = node_lambda;
  out.node_depth = node_depth;
  for (int i = 0; i < (int)nodes.size(); ++i)
    if (nodes[i].depth == radius) out.boundary.push_back(i);

  // interior fiber-product checks against both lattice quotients
  for (int i = 0; i < (int)nodes.size(); ++i) {
    if (nodes[i].depth >= radius) continue;
    int v = nodes[i].lambda_v;
    const SerreGraph& xv = data.y.vertex_space(v);
    for (int side = 0; side < 2; ++side) {
      const PermGroup& gamma = side == 0 ? data.gamma1_v[v] : data.gamma2_v[v];
      auto gq = detail::free_quotient_by(xv, gamma);  // X_v -> X_v/Gamma
      const SerreGraph& base = gq.graph;
      // vertical map hat_vertex -> base
      std::vector<int> hv_vm(glue.hat_vertex[v].num_vertices(), -1);
      std::vector<int> hv_dm(glue.hat_vertex[v].num_darts(), -1);
      for (int x = 0; x < xv.num_vertices(); ++x)
        hv_vm[glue.hat_vertex_proj[v].vmap[x]] = gq.projection.vmap[x];
      for (int x = 0; x < xv.num_darts(); ++x)
        hv_dm[glue.hat_vertex_proj[v].dmap[x]] = gq.projection.dmap[x];
      auto f2 = GraphMorphism::validate(glue.hat_vertex[v], base, hv_vm, hv_dm);

      // downstairs union: per link dart, per Gamma-orbit of copies
      struct DownPiece {
        InducedSubgraph sub;          // representative copy inside X_v
        FreeQuotientResult quotient;  // by the stabilizer restrictions
        std::map<std::vector<int>, Perm> to_rep;  // copy set -> gamma moving it to the rep
      };
      std::vector<DownPiece> downs;
      std::map<std::pair<int, std::vector<int>>, int> down_of;  // (dart, copyset)
      for (int e : u.link(v)) {
        const auto& cps = get_copies(e);
        std::map<std::vector<int>, int> cindex;
        for (int c = 0; c < (int)cps.size(); ++c) cindex[cps[c].set] = c;
        std::vector<char> used(cps.size(), 0);
        for (int c = 0; c < (int)cps.size(); ++c) {
          if (used[c]) continue;
          // gamma-orbit of this copy
          DownPiece piece;
          std::vector<int> members{c};
          used[c] = 1;
          piece.to_rep[cps[c].set] = perm_identity(gamma.domain_size());
          for (size_t h = 0; h < members.size(); ++h)
            for (const auto& g : gamma.generators()) {
              GraphMap m = domain_perm_to_graphmap(xv, g);
              std::vector<int> img;
              for (int x : cps[members[h]].set) img.push_back(m.v[x]);
              std::sort(img.begin(), img.end());
              int j = cindex.at(img);
              if (!used[j]) {
                used[j] = 1;
                members.push_back(j);
                // g moves members[h] to j, so inverse(g)... record a mover to rep
                piece.to_rep[cps[j].set] =
                    gmul(piece.to_rep[cps[members[h]].set], perm_inverse(g));
              }
            }
          piece.sub = induced_subgraph(xv, cps[c].set);
          // stabilizer restrictions on the representative copy
          std::vector<std::vector<int>> vs, ds;
          for (const auto& g : gamma.elements()) {
            GraphMap m = domain_perm_to_graphmap(xv, g);
            bool stab = true;
            for (int x : cps[c].set) {
              if (!std::binary_search(cps[c].set.begin(), cps[c].set.end(), m.v[x])) {
                stab = false;
                break;
              }
            }
            if (!stab) continue;
            // restrict to the induced subgraph coordinates
            std::map<int, int> back;
            for (int k = 0; k < (int)piece.sub.vertex_in.size(); ++k)
              back[piece.sub.vertex_in[k]] = k;
            std::map<int, int> dback;
            for (int k = 0; k < (int)piece.sub.dart_in.size(); ++k)
              dback[piece.sub.dart_in[k]] = k;
            std::vector<int> rv(piece.sub.graph.num_vertices());
            std::vector<int> rd(piece.sub.graph.num_darts());
            for (int k = 0; k < piece.sub.graph.num_vertices(); ++k)
              rv[k] = back.at(m.v[piece.sub.vertex_in[k]]);
            for (int k = 0; k < piece.sub.graph.num_darts(); ++k)
              rd[k] = dback.at(m.d[piece.sub.dart_in[k]]);
            vs.push_back(rv);
            ds.push_back(rd);
          }
          piece.quotient = quotient_by_free_action(piece.sub.graph, vs, ds);
          for (int j : members) down_of[{e, cps[j].set}] = (int)downs.size();
          downs.push_back(std::move(piece));
        }
      }
      std::vector<const SerreGraph*> down_graphs;
      for (const auto& p : downs) down_graphs.push_back(&p.quotient.graph);
      auto a1 = detail::union_many(down_graphs);
      // f1: A1 -> base
      std::vector<int> a1_vm(a1.graph.num_vertices(), -1), a1_dm(a1.graph.num_darts(), -1);
      for (size_t pi = 0; pi < downs.size(); ++pi) {
        const DownPiece& p = downs[pi];
        for (int k = 0; k < p.sub.graph.num_vertices(); ++k)
          a1_vm[a1.vin[pi][p.quotient.projection.vmap[k]]] =
              gq.projection.vmap[p.sub.vertex_in[k]];
        for (int k = 0; k < p.sub.graph.num_darts(); ++k)
          a1_dm[a1.din[pi][p.quotient.projection.dmap[k]]] =
              gq.projection.dmap[p.sub.dart_in[k]];
      }
      auto f1 = GraphMorphism::validate(a1.graph, base, a1_vm, a1_dm);

      // corner: the ball edges at this node
      std::vector<int> incident;  // tree darts with tau == node i
      for (int d = 0; d < out.ball.underlying().num_darts(); ++d)
        if (out.ball.underlying().tau(d) == i) incident.push_back(d);
      std::vector<const SerreGraph*> cparts;
      for (int d : incident) cparts.push_back(&out.ball.edge_space_of(d));
      auto corner = detail::union_many(cparts);
      std::vector<int> p1_vm(corner.graph.num_vertices(), -1),
          p1_dm(corner.graph.num_darts(), -1);
      std::vector<int> p2_vm(corner.graph.num_vertices(), -1),
          p2_dm(corner.graph.num_darts(), -1);
      for (size_t ci = 0; ci < incident.size(); ++ci) {
        int d = incident[ci];
        int le = side_lambda[d];
        const Perm& q = side_q[d];
        int ei = data.y.edge_space_index(le);
        const SerreGraph& xe = data.y.edge_space(ei);
        GraphMap mq = domain_perm_to_graphmap(xv, q);
        // the copy carried by this side
        std::vector<int> cset;
        for (int x : data.y.attach_vmap(le)) cset.push_back(mq.v[x]);
        std::sort(cset.begin(), cset.end());
        const DownPiece& dp = downs[down_of.at({le, cset})];
        GraphMap mover = domain_perm_to_graphmap(xv, dp.to_rep.at(cset));
        std::map<int, int> back;
        for (int k = 0; k < (int)dp.sub.vertex_in.size(); ++k)
          back[dp.sub.vertex_in[k]] = k;
        std::map<int, int> dback;
        for (int k = 0; k < (int)dp.sub.dart_in.size(); ++k)
          dback[dp.sub.dart_in[k]] = k;
        int pi = down_of.at({le, cset});
        for (int x = 0; x < xe.num_vertices(); ++x) {
          int src = corner.vin[ci][glue.hat_edge_proj[ei].vmap[x]];
          int in_xv = mq.v[data.y.attach_vmap(le)[x]];
          int down = a1.vin[pi][downs[pi].quotient.projection.vmap[back.at(mover.v[in_xv])]];
          if (p1_vm[src] >= 0 && p1_vm[src] != down)
            throw error(errc::gluing_mismatch, "ball corner map is inconsistent");
          p2_vm[src] = out.ball.attach_vmap(d)[glue.hat_edge_proj[ei].vmap[x]];
          p1_vm[src] = down;
        }
        for (int x = 0; x < xe.num_darts(); ++x) {
          int src = corner.din[ci][glue.hat_edge_proj[ei].dmap[x]];
          int in_xv = mq.d[data.y.attach_dmap(le)[x]];
          int down = a1.din[pi][downs[pi].quotient.projection.dmap[dback.at(mover.d[in_xv])]];
          if (p1_dm[src] >= 0 && p1_dm[src] != down)
            throw error(errc::gluing_mismatch, "ball corner map is inconsistent");
          p2_dm[src] = out.ball.attach_dmap(d)[glue.hat_edge_proj[ei].dmap[x]];
          p1_dm[src] = down;
        }
      }
      auto p2 = GraphMorphism::validate(corner.graph, glue.hat_vertex[v], p2_vm, p2_dm);
      auto p1 = GraphMorphism::validate(corner.graph, a1.graph, p1_vm, p1_dm);
      try {
        auto rep = is_fiber_product_diagram(p1, p2, f1, f2);
        std::string name = "interior-node-" + std::to_string(i) +
                           (side == 0 ? "-gamma" : "-gamma'");
        out.interior_checks.push_back({name, rep.ok, rep.witness});
        if (!rep.ok) out.interior_ok = false;
      } catch (const error& err) {
        out.interior_checks.push_back(
            {"interior-node-" + std::to_string(i), false, err.what()});
        out.interior_ok = false;
      }
    }
  }
  return out;
}

}  // namespace serre
