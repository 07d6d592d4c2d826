#pragma once
// Finite graphs in Serre form: a graph is a set of vertices and a set of
// darts (oriented edges) carrying a fixed-point-free involution `bar` and
// endpoint maps iota/tau with tau(bar e) = iota(e).  Geometric edges are
// derived from bar-pairs and never stored.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace serre {

enum class errc {
  fixed_point_involution,
  non_involutive_bar,
  dangling_reference,
  duplicate_id,
  partition_mismatch,
  not_connected,
  not_transitive,
  element_bound_exceeded,
  not_a_subgroup,
  not_normal,
  not_a_homomorphism,
  not_invariant,
  not_a_tree,
  orbit_reps_invalid,
  not_equivariant_family,
  containment_violated,
  non_commuting,
  not_free,
  edge_inversion,
  no_common_cover,
  search_bound_exceeded,
  ambiguous_local_symmetry,
  gluing_mismatch,
  invalid_argument,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::fixed_point_involution: return "FixedPointInvolution";
    case errc::non_involutive_bar: return "NonInvolutiveBar";
    case errc::dangling_reference: return "DanglingReference";
    case errc::duplicate_id: return "DuplicateId";
    case errc::partition_mismatch: return "PartitionMismatch";
    case errc::not_connected: return "NotConnected";
    case errc::not_transitive: return "NotTransitive";
    case errc::element_bound_exceeded: return "ElementBoundExceeded";
    case errc::not_a_subgroup: return "NotASubgroup";
    case errc::not_normal: return "NotNormal";
    case errc::not_a_homomorphism: return "NotAHomomorphism";
    case errc::not_invariant: return "NotInvariant";
    case errc::not_a_tree: return "NotATree";
    case errc::orbit_reps_invalid: return "OrbitRepsInvalid";
    case errc::not_equivariant_family: return "NotEquivariantFamily";
    case errc::containment_violated: return "ContainmentViolated";
    case errc::non_commuting: return "NonCommuting";
    case errc::not_free: return "NotFree";
    case errc::edge_inversion: return "EdgeInversion";
    case errc::no_common_cover: return "NoCommonCover";
    case errc::search_bound_exceeded: return "SearchBoundExceeded";
    case errc::ambiguous_local_symmetry: return "AmbiguousLocalSymmetry";
    case errc::gluing_mismatch: return "GluingMismatch";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc c, const std::string& what)
      : std::runtime_error(std::string(errc_name(c)) + ": " + what), code_(c) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

// ---------------------------------------------------------------------------
// Raw description of a graph, as parsed from a file or built by hand.

struct DartSpec {
  std::string id;
  std::string bar;
  std::string from;  // iota
  std::string to;    // tau
};

struct GraphData {
  std::vector<std::string> vertices;
  std::vector<DartSpec> darts;
};

class SerreGraph {
 public:
  SerreGraph() = default;

  // Validates a raw description.  Throws on fixed-point bar pairs, bars that
  // are not involutive or endpoint-consistent, and dangling ids.
  static SerreGraph validate(const GraphData& raw) {
    SerreGraph g;
    g.vertex_ids_ = raw.vertices;
    for (int i = 0; i < (int)g.vertex_ids_.size(); ++i) {
      if (!g.vindex_.emplace(g.vertex_ids_[i], i).second)
        throw error(errc::duplicate_id, "vertex '" + g.vertex_ids_[i] + "'");
    }
    for (const auto& d : raw.darts) {
      int idx = (int)g.dart_ids_.size();
      g.dart_ids_.push_back(d.id);
      if (!g.dindex_.emplace(d.id, idx).second)
        throw error(errc::duplicate_id, "dart '" + d.id + "'");
    }
    g.bar_.resize(g.dart_ids_.size());
    g.iota_.resize(g.dart_ids_.size());
    g.tau_.resize(g.dart_ids_.size());
    for (int i = 0; i < (int)raw.darts.size(); ++i) {
      const auto& d = raw.darts[i];
      if (d.bar == d.id)
        throw error(errc::fixed_point_involution, "dart '" + d.id + "'");
      auto b = g.dindex_.find(d.bar);
      if (b == g.dindex_.end())
        throw error(errc::dangling_reference,
                    "dart '" + d.id + "' names missing bar '" + d.bar + "'");
      auto u = g.vindex_.find(d.from);
      auto v = g.vindex_.find(d.to);
      if (u == g.vindex_.end() || v == g.vindex_.end())
        throw error(errc::dangling_reference,
                    "dart '" + d.id + "' has a missing endpoint");
      g.bar_[i] = b->second;
      g.iota_[i] = u->second;
      g.tau_[i] = v->second;
    }
    for (int i = 0; i < (int)g.bar_.size(); ++i) {
      if (g.bar_[g.bar_[i]] != i)
        throw error(errc::non_involutive_bar, "dart '" + g.dart_ids_[i] + "'");
      if (g.tau_[g.bar_[i]] != g.iota_[i] || g.iota_[g.bar_[i]] != g.tau_[i])
        throw error(errc::non_involutive_bar,
                    "dart '" + g.dart_ids_[i] + "' endpoints do not reverse");
    }
    g.build_links();
    return g;
  }

  int num_vertices() const { return (int)vertex_ids_.size(); }
  int num_darts() const { return (int)dart_ids_.size(); }
  int num_geometric_edges() const { return (int)dart_ids_.size() / 2; }

  const std::string& vertex_id(int v) const { return vertex_ids_[v]; }
  const std::string& dart_id(int d) const { return dart_ids_[d]; }
  const std::vector<std::string>& vertex_ids() const { return vertex_ids_; }
  const std::vector<std::string>& dart_ids() const { return dart_ids_; }

  int vertex_index(const std::string& id) const {
    auto it = vindex_.find(id);
    if (it == vindex_.end())
      throw error(errc::dangling_reference, "no vertex '" + id + "'");
    return it->second;
  }
  int dart_index(const std::string& id) const {
    auto it = dindex_.find(id);
    if (it == dindex_.end())
      throw error(errc::dangling_reference, "no dart '" + id + "'");
    return it->second;
  }
  bool has_vertex(const std::string& id) const { return vindex_.count(id) != 0; }
  bool has_dart(const std::string& id) const { return dindex_.count(id) != 0; }

  int bar(int d) const { return bar_[d]; }
  int iota(int d) const { return iota_[d]; }
  int tau(int d) const { return tau_[d]; }

  // lk(v) = darts terminating at v.
  const std::vector<int>& link(int v) const { return links_[v]; }
  int degree(int v) const { return (int)links_[v].size(); }

  // One dart per geometric edge: the one with the smaller index.
  std::vector<int> geometric_reps() const {
    std::vector<int> reps;
    for (int d = 0; d < num_darts(); ++d)
      if (d < bar_[d]) reps.push_back(d);
    return reps;
  }
  int rep(int d) const { return std::min(d, bar_[d]); }

  std::vector<int> vertex_component() const {
    std::vector<int> comp(num_vertices(), -1);
    int c = 0;
    for (int s = 0; s < num_vertices(); ++s) {
      if (comp[s] >= 0) continue;
      comp[s] = c;
      std::queue<int> q;
      q.push(s);
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int e : links_[v]) {
          int u = iota_[e];
          if (comp[u] < 0) {
            comp[u] = c;
            q.push(u);
          }
        }
      }
      ++c;
    }
    return comp;
  }

  int num_components() const {
    auto comp = vertex_component();
    return comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
  }

  bool is_connected() const {
    return num_vertices() > 0 && num_components() == 1;
  }

  bool is_tree() const {
    return is_connected() &&
           num_geometric_edges() == num_vertices() - 1;
  }

 private:
  void build_links() {
    links_.assign(vertex_ids_.size(), {});
    for (int d = 0; d < (int)dart_ids_.size(); ++d)
      links_[tau_[d]].push_back(d);
  }

  std::vector<std::string> vertex_ids_;
  std::vector<std::string> dart_ids_;
  std::map<std::string, int> vindex_, dindex_;
  std::vector<int> bar_, iota_, tau_;
  std::vector<std::vector<int>> links_;
};

// Convenience builder used by derived constructions; every edge adds a bar
// pair at once so the result always validates.
class GraphBuilder {
 public:
  void add_vertex(const std::string& id) { data_.vertices.push_back(id); }

  // Adds the pair {eid, eid+"'"} unless an explicit reverse id is given.
  void add_edge(const std::string& u, const std::string& v,
                const std::string& eid, const std::string& rid = "") {
    std::string r = rid.empty() ? eid + "'" : rid;
    data_.darts.push_back({eid, r, u, v});
    data_.darts.push_back({r, eid, v, u});
  }

  SerreGraph build() const { return SerreGraph::validate(data_); }
  const GraphData& data() const { return data_; }

 private:
  GraphData data_;
};

// ---------------------------------------------------------------------------
// Morphisms of Serre graphs.

struct GraphMorphism {
  SerreGraph source, target;
  std::vector<int> vmap;  // source vertex -> target vertex
  std::vector<int> dmap;  // source dart -> target dart

  // Checks that dmap commutes with bar, iota and tau.
  static GraphMorphism validate(SerreGraph src, SerreGraph dst,
                                std::vector<int> vmap, std::vector<int> dmap) {
    if ((int)vmap.size() != src.num_vertices() ||
        (int)dmap.size() != src.num_darts())
      throw error(errc::invalid_argument, "morphism map sizes do not match");
    for (int v = 0; v < src.num_vertices(); ++v)
      if (vmap[v] < 0 || vmap[v] >= dst.num_vertices())
        throw error(errc::dangling_reference, "vertex image out of range");
    for (int d = 0; d < src.num_darts(); ++d) {
      int fd = dmap[d];
      if (fd < 0 || fd >= dst.num_darts())
        throw error(errc::dangling_reference, "dart image out of range");
      if (dmap[src.bar(d)] != dst.bar(fd))
        throw error(errc::invalid_argument,
                    "dart map does not commute with bar at '" +
                        src.dart_id(d) + "'");
      if (vmap[src.iota(d)] != dst.iota(fd) || vmap[src.tau(d)] != dst.tau(fd))
        throw error(errc::invalid_argument,
                    "dart map does not commute with endpoints at '" +
                        src.dart_id(d) + "'");
    }
    GraphMorphism f;
    f.source = std::move(src);
    f.target = std::move(dst);
    f.vmap = std::move(vmap);
    f.dmap = std::move(dmap);
    return f;
  }

  static GraphMorphism identity(const SerreGraph& g) {
    std::vector<int> vm(g.num_vertices()), dm(g.num_darts());
    for (int i = 0; i < (int)vm.size(); ++i) vm[i] = i;
    for (int i = 0; i < (int)dm.size(); ++i) dm[i] = i;
    return validate(g, g, vm, dm);
  }

  // Map by ids; convenient for file input and tests.
  static GraphMorphism from_ids(const SerreGraph& src, const SerreGraph& dst,
                                const std::map<std::string, std::string>& vm,
                                const std::map<std::string, std::string>& dm) {
    std::vector<int> vmap(src.num_vertices(), -1), dmap(src.num_darts(), -1);
    for (const auto& [a, b] : vm) vmap[src.vertex_index(a)] = dst.vertex_index(b);
    for (const auto& [a, b] : dm) dmap[src.dart_index(a)] = dst.dart_index(b);
    for (int v = 0; v < src.num_vertices(); ++v)
      if (vmap[v] < 0)
        throw error(errc::dangling_reference,
                    "vertex '" + src.vertex_id(v) + "' has no image");
    for (int d = 0; d < src.num_darts(); ++d)
      if (dmap[d] < 0)
        throw error(errc::dangling_reference,
                    "dart '" + src.dart_id(d) + "' has no image");
    return validate(src, dst, std::move(vmap), std::move(dmap));
  }
};

inline GraphMorphism compose(const GraphMorphism& f, const GraphMorphism& g) {
  // g after f
  std::vector<int> vm(f.source.num_vertices()), dm(f.source.num_darts());
  for (int v = 0; v < (int)vm.size(); ++v) vm[v] = g.vmap[f.vmap[v]];
  for (int d = 0; d < (int)dm.size(); ++d) dm[d] = g.dmap[f.dmap[d]];
  return GraphMorphism::validate(f.source, g.target, std::move(vm), std::move(dm));
}

// ---------------------------------------------------------------------------
// Covering verification.  A morphism is a covering iff it restricts to a
// bijection lk(v) -> lk(f(v)) at every source vertex.

struct CoveringReport {
  bool covering = false;
  long long degree = -1;  // common fiber size when source and target connected
  std::string witness;    // first failure, empty when covering

  explicit operator bool() const { return covering; }
};

inline CoveringReport is_covering(const GraphMorphism& f) {
  CoveringReport r;
  for (int v = 0; v < f.source.num_vertices(); ++v) {
    int w = f.vmap[v];
    const auto& up = f.source.link(v);
    const auto& down = f.target.link(w);
    if (up.size() != down.size()) {
      r.witness = "link size mismatch at vertex '" + f.source.vertex_id(v) +
                  "' (" + std::to_string(up.size()) + " vs " +
                  std::to_string(down.size()) + ")";
      return r;
    }
    std::vector<char> hit(f.target.num_darts(), 0);
    for (int e : up) {
      int fe = f.dmap[e];
      if (hit[fe]) {
        r.witness = "link not injective at vertex '" + f.source.vertex_id(v) +
                    "': darts collide on '" + f.target.dart_id(fe) + "'";
        return r;
      }
      hit[fe] = 1;
    }
  }
  r.covering = true;
  // over a connected target the fiber cardinality is constant, whether or
  // not the source is connected
  if (f.target.is_connected()) {
    std::vector<long long> fiber(f.target.num_vertices(), 0);
    for (int v = 0; v < f.source.num_vertices(); ++v) ++fiber[f.vmap[v]];
    r.degree = fiber.empty() ? 0 : fiber[0];
    for (long long c : fiber)
      if (c != r.degree) {
        r.covering = false;
        r.degree = -1;
        r.witness = "fiber cardinalities differ";
        return r;
      }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Barycentric subdivision: every geometric edge becomes a 2-path through a
// fresh midpoint vertex.  Dart count exactly doubles.

struct SubdivisionResult {
  SerreGraph graph;
  std::vector<int> vertex_image;      // original vertex -> new vertex
  std::map<int, int> midpoint_of;     // geometric rep dart -> midpoint vertex
};

inline std::string midpoint_id(const SerreGraph& g, int repdart) {
  return "m:" + g.dart_id(repdart);
}

inline SubdivisionResult barycentric_subdivision(const SerreGraph& g) {
  GraphBuilder b;
  for (int v = 0; v < g.num_vertices(); ++v) b.add_vertex(g.vertex_id(v));
  auto reps = g.geometric_reps();
  for (int e : reps) b.add_vertex(midpoint_id(g, e));
  for (int e : reps) {
    const std::string m = midpoint_id(g, e);
    // iota(e) -- m -- tau(e); dart names keep the original orientation
    b.add_edge(g.vertex_id(g.iota(e)), m, "s0:" + g.dart_id(e),
               "s0:" + g.dart_id(g.bar(e)));
    b.add_edge(m, g.vertex_id(g.tau(e)), "s1:" + g.dart_id(e),
               "s1:" + g.dart_id(g.bar(e)));
  }
  SubdivisionResult out;
  out.graph = b.build();
  out.vertex_image.resize(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v)
    out.vertex_image[v] = out.graph.vertex_index(g.vertex_id(v));
  for (int e : reps)
    out.midpoint_of[e] = out.graph.vertex_index(midpoint_id(g, e));
  return out;
}

// ---------------------------------------------------------------------------
// Vertex partitions and imprimitivity-style quotients.

struct VertexPartition {
  std::vector<std::vector<int>> blocks;  // sorted members, blocks sorted by least member
  std::vector<int> block_of;             // vertex -> block index

  static VertexPartition from_blocks(int n, std::vector<std::vector<int>> blocks) {
    VertexPartition p;
    p.block_of.assign(n, -1);
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::sort(blocks.begin(), blocks.end());
    for (int i = 0; i < (int)blocks.size(); ++i) {
      if (blocks[i].empty())
        throw error(errc::partition_mismatch, "empty block");
      for (int v : blocks[i]) {
        if (v < 0 || v >= n)
          throw error(errc::partition_mismatch, "block member out of range");
        if (p.block_of[v] != -1)
          throw error(errc::partition_mismatch, "vertex in two blocks");
        p.block_of[v] = i;
      }
    }
    for (int v = 0; v < n; ++v)
      if (p.block_of[v] == -1)
        throw error(errc::partition_mismatch, "vertex in no block");
    p.blocks = std::move(blocks);
    return p;
  }

  static VertexPartition from_block_of(std::vector<int> block_of) {
    int m = block_of.empty()
                ? 0
                : 1 + *std::max_element(block_of.begin(), block_of.end());
    std::vector<std::vector<int>> blocks(m);
    for (int v = 0; v < (int)block_of.size(); ++v) {
      if (block_of[v] < 0) throw error(errc::partition_mismatch, "unassigned vertex");
      blocks[block_of[v]].push_back(v);
    }
    blocks.erase(std::remove_if(blocks.begin(), blocks.end(),
                                [](const std::vector<int>& b) { return b.empty(); }),
                 blocks.end());
    return from_blocks((int)block_of.size(), std::move(blocks));
  }

  static VertexPartition singletons(int n) {
    std::vector<int> bo(n);
    for (int i = 0; i < n; ++i) bo[i] = i;
    return from_block_of(std::move(bo));
  }

  int num_blocks() const { return (int)blocks.size(); }

  bool operator==(const VertexPartition& o) const { return blocks == o.blocks; }
  bool operator<(const VertexPartition& o) const { return blocks < o.blocks; }

  // True if every block of *this is contained in a block of coarser.
  bool refines(const VertexPartition& c) const {
    for (const auto& b : blocks) {
      int t = c.block_of[b[0]];
      for (int v : b)
        if (c.block_of[v] != t) return false;
    }
    return true;
  }
};

struct QuotientResult {
  SerreGraph graph;
  std::vector<int> vmap;          // source vertex -> quotient vertex
  std::vector<int> dmap;          // source dart -> quotient dart, -1 where removed
  std::vector<std::string> block_ids;
};

// Quotient by a vertex partition.  By default the result is simple: blocks
// are adjacent iff some cross edge exists, and one-edge loops and multiple
// edges are removed.  keep_multi preserves every dart (diagnostic mode).
inline QuotientResult quotient_by_partition(const SerreGraph& g,
                                            const VertexPartition& p,
                                            bool keep_multi = false) {
  if ((int)p.block_of.size() != g.num_vertices())
    throw error(errc::partition_mismatch, "partition carrier size mismatch");
  QuotientResult out;
  out.block_ids.resize(p.num_blocks());
  GraphBuilder b;
  for (int i = 0; i < p.num_blocks(); ++i) {
    out.block_ids[i] = "[" + g.vertex_id(p.blocks[i][0]) + "]";
    b.add_vertex(out.block_ids[i]);
  }
  out.dmap.assign(g.num_darts(), -1);
  if (keep_multi) {
    for (int d : g.geometric_reps())
      b.add_edge(out.block_ids[p.block_of[g.iota(d)]],
                 out.block_ids[p.block_of[g.tau(d)]], "q:" + g.dart_id(d),
                 "q:" + g.dart_id(g.bar(d)));
    out.graph = b.build();
    for (int d = 0; d < g.num_darts(); ++d)
      out.dmap[d] = out.graph.dart_index("q:" + g.dart_id(d));
  } else {
    std::set<std::pair<int, int>> seen;
    for (int d : g.geometric_reps()) {
      int i = p.block_of[g.iota(d)], j = p.block_of[g.tau(d)];
      if (i == j) continue;
      auto key = std::minmax(i, j);
      if (!seen.insert(key).second) continue;
      b.add_edge(out.block_ids[key.first], out.block_ids[key.second],
                 "q:" + out.block_ids[key.first] + out.block_ids[key.second],
                 "q:" + out.block_ids[key.second] + out.block_ids[key.first]);
    }
    out.graph = b.build();
    for (int d = 0; d < g.num_darts(); ++d) {
      int i = p.block_of[g.iota(d)], j = p.block_of[g.tau(d)];
      if (i == j) continue;
      out.dmap[d] = out.graph.dart_index("q:" + out.block_ids[i] + out.block_ids[j]);
    }
  }
  out.vmap.resize(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v)
    out.vmap[v] = out.graph.vertex_index(out.block_ids[p.block_of[v]]);
  return out;
}

// Quotient of a Serre graph by orbits of a free action given as explicit
// vertex/dart permutation pairs (closed under composition not required; the
// orbit closure of the listed elements is used).  Darts must never map to
// their own bar.  Multi-edges and loops are preserved; in contrast to
// quotient_by_partition this is the covering-space quotient.
struct FreeQuotientResult {
  SerreGraph graph;
  GraphMorphism projection;
};

inline FreeQuotientResult quotient_by_free_action(
    const SerreGraph& g, const std::vector<std::vector<int>>& vperms,
    const std::vector<std::vector<int>>& dperms) {
  // orbit closure via union-find
  std::vector<int> vuf(g.num_vertices()), duf(g.num_darts());
  for (int i = 0; i < (int)vuf.size(); ++i) vuf[i] = i;
  for (int i = 0; i < (int)duf.size(); ++i) duf[i] = i;
  auto find = [](std::vector<int>& uf, int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  for (size_t k = 0; k < vperms.size(); ++k) {
    for (int v = 0; v < g.num_vertices(); ++v) {
      int a = find(vuf, v), bq = find(vuf, vperms[k][v]);
      if (a != bq) vuf[std::max(a, bq)] = std::min(a, bq);
    }
    for (int d = 0; d < g.num_darts(); ++d) {
      if (dperms[k][d] == g.bar(d))
        throw error(errc::not_free, "dart '" + g.dart_id(d) + "' is inverted");
      int a = find(duf, d), bq = find(duf, dperms[k][d]);
      if (a != bq) duf[std::max(a, bq)] = std::min(a, bq);
    }
  }
  for (int d = 0; d < g.num_darts(); ++d)
    if (find(duf, d) == find(duf, g.bar(d)))
      throw error(errc::not_free,
                  "dart '" + g.dart_id(d) + "' is inverted by the orbit closure");
  GraphBuilder b;
  std::vector<int> vq(g.num_vertices(), -1), dq(g.num_darts(), -1);
  std::vector<std::string> vname(g.num_vertices()), dname(g.num_darts());
  for (int v = 0; v < g.num_vertices(); ++v)
    if (find(vuf, v) == v) {
      vname[v] = "[" + g.vertex_id(v) + "]";
      b.add_vertex(vname[v]);
    }
  for (int d = 0; d < g.num_darts(); ++d) {
    int r = find(duf, d);
    dname[r] = "[" + g.dart_id(r) + "]";
  }
  std::set<int> done;
  for (int d = 0; d < g.num_darts(); ++d) {
    int r = find(duf, d);
    int rb = find(duf, g.bar(d));
    if (done.count(r) || done.count(rb)) continue;
    done.insert(r);
    done.insert(rb);
    b.add_edge(vname[find(vuf, g.iota(r))], vname[find(vuf, g.tau(r))],
               dname[r], dname[rb]);
  }
  FreeQuotientResult out;
  out.graph = b.build();
  std::vector<int> vm(g.num_vertices()), dm(g.num_darts());
  for (int v = 0; v < g.num_vertices(); ++v)
    vm[v] = out.graph.vertex_index(vname[find(vuf, v)]);
  for (int d = 0; d < g.num_darts(); ++d)
    dm[d] = out.graph.dart_index(dname[find(duf, d)]);
  out.projection = GraphMorphism::validate(g, out.graph, std::move(vm), std::move(dm));
  return out;
}

// ---------------------------------------------------------------------------
// Induced subgraph on a vertex subset (keeps every dart with both endpoints
// inside), with the inclusion morphism data.

struct InducedSubgraph {
  SerreGraph graph;
  std::vector<int> vertex_in;  // subgraph vertex -> ambient vertex
  std::vector<int> dart_in;    // subgraph dart -> ambient dart
};

inline InducedSubgraph induced_subgraph(const SerreGraph& g,
                                        const std::vector<int>& vertices) {
  std::vector<char> in(g.num_vertices(), 0);
  for (int v : vertices) in[v] = 1;
  GraphData data;
  std::vector<int> vs = vertices;
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  for (int v : vs) data.vertices.push_back(g.vertex_id(v));
  InducedSubgraph out;
  for (int d = 0; d < g.num_darts(); ++d)
    if (in[g.iota(d)] && in[g.tau(d)]) {
      data.darts.push_back({g.dart_id(d), g.dart_id(g.bar(d)),
                            g.vertex_id(g.iota(d)), g.vertex_id(g.tau(d))});
      out.dart_in.push_back(d);
    }
  out.graph = SerreGraph::validate(data);
  out.vertex_in = vs;
  return out;
}

// Disjoint union with prefixed ids; returns the two inclusions.
inline SerreGraph disjoint_union(const SerreGraph& a, const SerreGraph& b,
                                 const std::string& pa, const std::string& pb) {
  GraphData data;
  for (const auto& v : a.vertex_ids()) data.vertices.push_back(pa + v);
  for (const auto& v : b.vertex_ids()) data.vertices.push_back(pb + v);
  for (int d = 0; d < a.num_darts(); ++d)
    data.darts.push_back({pa + a.dart_id(d), pa + a.dart_id(a.bar(d)),
                          pa + a.vertex_id(a.iota(d)), pa + a.vertex_id(a.tau(d))});
  for (int d = 0; d < b.num_darts(); ++d)
    data.darts.push_back({pb + b.dart_id(d), pb + b.dart_id(b.bar(d)),
                          pb + b.vertex_id(b.iota(d)), pb + b.vertex_id(b.tau(d))});
  return SerreGraph::validate(data);
}

// ---------------------------------------------------------------------------
// Colorings: opaque vertex/dart labels carried alongside a graph.

struct Coloring {
  std::map<std::string, std::string> vertex;
  std::map<std::string, std::string> dart;

  std::string vcolor(const SerreGraph& g, int v) const {
    auto it = vertex.find(g.vertex_id(v));
    return it == vertex.end() ? std::string() : it->second;
  }
  std::string dcolor(const SerreGraph& g, int d) const {
    auto it = dart.find(g.dart_id(d));
    return it == dart.end() ? std::string() : it->second;
  }
  bool total(const SerreGraph& g) const {
    for (const auto& v : g.vertex_ids())
      if (!vertex.count(v)) return false;
    for (const auto& d : g.dart_ids())
      if (!dart.count(d)) return false;
    return true;
  }
};

}  // namespace serre
