#pragma once
// Voltage covers: assign a permutation of [degree] to each geometric edge
// (trivial on a spanning tree) and derive the cover with one vertex fiber
// per domain point.  The projection is a covering by construction and is
// re-verified wherever it matters.

#include "serre/core.hpp"
#include "serre/perm.hpp"

namespace serre {

struct VoltageCover {
  SerreGraph graph;
  GraphMorphism projection;
};

// voltages are keyed by geometric rep dart; absent entries mean identity
inline VoltageCover voltage_cover(const SerreGraph& base, int degree,
                                  const std::map<int, Perm>& voltages) {
  for (const auto& [e, p] : voltages) {
    if (base.rep(e) != e)
      throw error(errc::invalid_argument, "voltages are keyed by rep darts");
    if ((int)p.size() != degree || !perm_is_bijection(p))
      throw error(errc::invalid_argument, "voltage is not a permutation of the fiber");
  }
  GraphData data;
  auto vid = [&](int v, int i) {
    return base.vertex_id(v) + "#" + std::to_string(i);
  };
  auto did = [&](int d, int i) { return base.dart_id(d) + "#" + std::to_string(i); };
  for (int v = 0; v < base.num_vertices(); ++v)
    for (int i = 0; i < degree; ++i) data.vertices.push_back(vid(v, i));
  for (int e : base.geometric_reps()) {
    Perm sigma = perm_identity(degree);
    auto it = voltages.find(e);
    if (it != voltages.end()) sigma = it->second;
    for (int i = 0; i < degree; ++i) {
      // dart copy (e,i) runs from (iota e, i) to (tau e, sigma(i))
      data.darts.push_back({did(e, i), did(base.bar(e), sigma[i]),
                            vid(base.iota(e), i), vid(base.tau(e), sigma[i])});
      data.darts.push_back({did(base.bar(e), sigma[i]), did(e, i),
                            vid(base.tau(e), sigma[i]), vid(base.iota(e), i)});
    }
  }
  VoltageCover out;
  out.graph = SerreGraph::validate(data);
  std::vector<int> vm(out.graph.num_vertices()), dm(out.graph.num_darts());
  for (int v = 0; v < base.num_vertices(); ++v)
    for (int i = 0; i < degree; ++i)
      vm[out.graph.vertex_index(vid(v, i))] = v;
  for (int e : base.geometric_reps()) {
    Perm sigma = perm_identity(degree);
    auto it = voltages.find(e);
    if (it != voltages.end()) sigma = it->second;
    for (int i = 0; i < degree; ++i) {
      dm[out.graph.dart_index(did(e, i))] = e;
      dm[out.graph.dart_index(did(base.bar(e), sigma[i]))] = base.bar(e);
    }
  }
  out.projection = GraphMorphism::validate(out.graph, base, vm, dm);
  return out;
}

// BFS spanning tree: returns per-dart membership and the non-tree rep darts.
struct SpanningTree {
  std::vector<char> in_tree;    // per dart
  std::vector<int> extra_reps;  // non-tree geometric reps
};

inline SpanningTree spanning_tree(const SerreGraph& g) {
  if (!g.is_connected())
    throw error(errc::not_connected, "spanning tree needs a connected graph");
  SpanningTree out;
  out.in_tree.assign(g.num_darts(), 0);
  std::vector<char> seen(g.num_vertices(), 0);
  std::queue<int> q;
  if (g.num_vertices() > 0) {
    seen[0] = 1;
    q.push(0);
  }
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int e : g.link(v)) {
      int u = g.iota(e);
      if (!seen[u]) {
        seen[u] = 1;
        out.in_tree[e] = out.in_tree[g.bar(e)] = 1;
        q.push(u);
      }
    }
  }
  for (int e : g.geometric_reps())
    if (!out.in_tree[e]) out.extra_reps.push_back(e);
  return out;
}

}  // namespace serre
