#pragma once
// Actions of permutation groups on Serre graphs: per generator a vertex
// permutation and a dart permutation.  The generator assignment is verified
// to extend to a homomorphism against the full enumerated multiplication,
// never assumed.

#include "serre/perm.hpp"

namespace serre {

class GroupAction {
 public:
  GroupAction() = default;
  GroupAction(PermGroup group, SerreGraph graph, std::vector<Perm> vgens,
              std::vector<Perm> dgens)
      : group_(std::move(group)),
        graph_(std::move(graph)),
        vgens_(std::move(vgens)),
        dgens_(std::move(dgens)) {
    if (vgens_.size() != group_.generators().size() ||
        dgens_.size() != group_.generators().size())
      throw error(errc::invalid_argument,
                  "one vertex and one dart permutation per generator required");
    for (size_t k = 0; k < vgens_.size(); ++k) check_automorphism(k);
  }

  const PermGroup& group() const { return group_; }
  const SerreGraph& graph() const { return graph_; }
  const std::vector<Perm>& vertex_gens() const { return vgens_; }
  const std::vector<Perm>& dart_gens() const { return dgens_; }

  // Joint enumeration of (group element, vertex action, dart action),
  // sorted by group element.  Reaching one element along two words with
  // different graph actions means the assignment is not a homomorphism.
  struct Table {
    std::vector<Perm> el;  // sorted
    std::vector<Perm> vp;
    std::vector<Perm> dp;

    int index_of(const Perm& g) const {
      auto it = std::lower_bound(el.begin(), el.end(), g);
      if (it == el.end() || *it != g)
        throw error(errc::dangling_reference, "element not in the group");
      return (int)(it - el.begin());
    }
  };

  const Table& table() const {
    if (!table_) {
      std::map<Perm, std::pair<Perm, Perm>> reached;
      Perm id = perm_identity(group_.domain_size());
      reached[id] = {perm_identity(graph_.num_vertices()),
                     perm_identity(graph_.num_darts())};
      std::vector<Perm> queue{id};
      for (size_t h = 0; h < queue.size(); ++h) {
        Perm cur = queue[h];
        auto act = reached[cur];
        for (size_t k = 0; k < vgens_.size(); ++k) {
          Perm nxt = perm_compose(cur, group_.generators()[k]);
          std::pair<Perm, Perm> nact{perm_compose(act.first, vgens_[k]),
                                     perm_compose(act.second, dgens_[k])};
          auto it = reached.find(nxt);
          if (it == reached.end()) {
            if ((int)reached.size() >= group_.element_bound())
              throw error(errc::element_bound_exceeded, "action enumeration");
            reached.emplace(nxt, std::move(nact));
            queue.push_back(std::move(nxt));
          } else if (it->second != nact) {
            throw error(errc::not_a_homomorphism,
                        "generator assignment is inconsistent");
          }
        }
      }
      auto t = std::make_shared<Table>();
      for (auto& [g, a] : reached) {
        t->el.push_back(g);
        t->vp.push_back(a.first);
        t->dp.push_back(a.second);
      }
      table_ = std::move(t);
    }
    return *table_;
  }

  // Graph action of an arbitrary enumerated element.
  const Perm& vertex_action(const Perm& g) const {
    return table().vp[table().index_of(g)];
  }
  const Perm& dart_action(const Perm& g) const {
    return table().dp[table().index_of(g)];
  }

  int act_vertex(const Perm& g, int v) const { return vertex_action(g)[v]; }
  int act_dart(const Perm& g, int d) const { return dart_action(g)[d]; }

  // Subgroup of elements acting trivially on vertices and darts.
  PermGroup kernel() const {
    const Table& t = table();
    std::vector<Perm> triv;
    for (size_t i = 0; i < t.el.size(); ++i)
      if (perm_is_identity(t.vp[i]) && perm_is_identity(t.dp[i]))
        triv.push_back(t.el[i]);
    return group_.spanned_by(triv);
  }

  bool is_faithful() const { return kernel().order() == 1; }

  // Stabilizer of a vertex, as a subgroup of the abstract group.
  PermGroup vertex_stabilizer(int v) const {
    const Table& t = table();
    std::vector<Perm> fix;
    for (size_t i = 0; i < t.el.size(); ++i)
      if (t.vp[i][v] == v) fix.push_back(t.el[i]);
    return group_.spanned_by(fix);
  }

  // Setwise stabilizer of the geometric edge of a dart.
  PermGroup edge_stabilizer(int d) const {
    const Table& t = table();
    int b = graph_.bar(d);
    std::vector<Perm> fix;
    for (size_t i = 0; i < t.el.size(); ++i)
      if (t.dp[i][d] == d || t.dp[i][d] == b) fix.push_back(t.el[i]);
    return group_.spanned_by(fix);
  }

  // Orientation-preserving edge stabilizer (fixes the dart itself).
  PermGroup dart_stabilizer(int d) const {
    const Table& t = table();
    std::vector<Perm> fix;
    for (size_t i = 0; i < t.el.size(); ++i)
      if (t.dp[i][d] == d) fix.push_back(t.el[i]);
    return group_.spanned_by(fix);
  }

  std::vector<int> vertex_orbit(const PermGroup& sub, int v) const {
    std::vector<char> in(graph_.num_vertices(), 0);
    std::vector<int> orb{v};
    in[v] = 1;
    for (size_t h = 0; h < orb.size(); ++h)
      for (const auto& g : sub.generators()) {
        int y = act_vertex(g, orb[h]);
        if (!in[y]) {
          in[y] = 1;
          orb.push_back(y);
        }
      }
    std::sort(orb.begin(), orb.end());
    return orb;
  }

  // Orbits of a subgroup on the graph's vertex set.
  VertexPartition vertex_orbit_partition(const PermGroup& sub) const {
    require_subgroup(group_, sub, "subgroup");
    std::vector<int> bo(graph_.num_vertices(), -1);
    int nb = 0;
    for (int v = 0; v < graph_.num_vertices(); ++v) {
      if (bo[v] >= 0) continue;
      for (int y : vertex_orbit(sub, v)) bo[y] = nb;
      ++nb;
    }
    return VertexPartition::from_block_of(std::move(bo));
  }

  // True if the partition is invariant under every generator.
  bool preserves_partition(const VertexPartition& p, std::string* witness = nullptr) const {
    for (size_t k = 0; k < vgens_.size(); ++k) {
      for (const auto& block : p.blocks) {
        int target = p.block_of[vgens_[k][block[0]]];
        for (int v : block)
          if (p.block_of[vgens_[k][v]] != target) {
            if (witness)
              *witness = "generator " + std::to_string(k) +
                         " splits the block of vertex '" +
                         graph_.vertex_id(block[0]) + "'";
            return false;
          }
      }
    }
    return true;
  }

 private:
  void check_automorphism(size_t k) const {
    const Perm& vp = vgens_[k];
    const Perm& dp = dgens_[k];
    if ((int)vp.size() != graph_.num_vertices() || !perm_is_bijection(vp) ||
        (int)dp.size() != graph_.num_darts() || !perm_is_bijection(dp))
      throw error(errc::invalid_argument, "generator action is not a bijection");
    for (int d = 0; d < graph_.num_darts(); ++d) {
      if (dp[graph_.bar(d)] != graph_.bar(dp[d]) ||
          vp[graph_.iota(d)] != graph_.iota(dp[d]) ||
          vp[graph_.tau(d)] != graph_.tau(dp[d]))
        throw error(errc::invalid_argument,
                    "generator " + std::to_string(k) +
                        " is not a graph automorphism");
    }
  }

  PermGroup group_;
  SerreGraph graph_;
  std::vector<Perm> vgens_, dgens_;
  mutable std::shared_ptr<const Table> table_;
};

inline PermGroup action_kernel(const GroupAction& a) { return a.kernel(); }

}  // namespace serre
