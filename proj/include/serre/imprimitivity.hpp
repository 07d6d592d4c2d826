#pragma once
// Imprimitivity systems from normal subgroups and the induced quotient
// action.  Invariance is verified, never trusted: downstream quotient
// constructions corrupt silently if blocks are not invariant.

#include "serre/action.hpp"

namespace serre {

// Blocks = K-orbits of vertices, for K a normal subgroup of the acting
// group.  Normality makes the result invariant under the whole action; the
// invariance is asserted before returning.
inline VertexPartition imprimitivity_from_normal(const GroupAction& a,
                                                 const PermGroup& k) {
  if (!k.is_subgroup_of(a.group()))
    throw error(errc::not_a_subgroup, "K is not a subgroup of the acting group");
  if (!is_normal_in(a.group(), k))
    throw error(errc::not_normal, "K is not normal in the acting group");
  VertexPartition p = a.vertex_orbit_partition(k);
  std::string witness;
  if (!a.preserves_partition(p, &witness))
    throw error(errc::not_invariant, "K-orbit partition is not invariant: " + witness);
  return p;
}

struct InducedQuotientAction {
  QuotientResult quotient;
  GroupAction action;  // induced action on the quotient graph
  PermGroup kernel;    // of the induced action
};

// The induced action g.[v] = [g.v] on the simple quotient graph, together
// with its kernel.
inline InducedQuotientAction induced_quotient_action(const GroupAction& a,
                                                     const VertexPartition& p) {
  std::string witness;
  if (!a.preserves_partition(p, &witness))
    throw error(errc::not_invariant, witness);
  InducedQuotientAction out;
  out.quotient = quotient_by_partition(a.graph(), p, false);
  const SerreGraph& q = out.quotient.graph;

  std::vector<Perm> vgens, dgens;
  for (size_t gidx = 0; gidx < a.vertex_gens().size(); ++gidx) {
    const Perm& vg = a.vertex_gens()[gidx];
    Perm vq(q.num_vertices(), -1);
    for (int b = 0; b < p.num_blocks(); ++b) {
      int img_block = p.block_of[vg[p.blocks[b][0]]];
      vq[out.quotient.vmap[p.blocks[b][0]]] = out.quotient.vmap[p.blocks[img_block][0]];
    }
    // the quotient is simple, so a dart is determined by its endpoints
    std::map<std::pair<int, int>, int> dart_at;
    for (int d = 0; d < q.num_darts(); ++d)
      dart_at[{q.iota(d), q.tau(d)}] = d;
    Perm dq(q.num_darts());
    for (int d = 0; d < q.num_darts(); ++d) {
      auto it = dart_at.find({vq[q.iota(d)], vq[q.tau(d)]});
      if (it == dart_at.end())
        throw error(errc::not_invariant, "quotient adjacency is not invariant");
      dq[d] = it->second;
    }
    vgens.push_back(std::move(vq));
    dgens.push_back(std::move(dq));
  }
  out.action = GroupAction(a.group(), q, vgens, dgens);
  out.kernel = out.action.kernel();
  return out;
}

}  // namespace serre
