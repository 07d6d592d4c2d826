#pragma once
// File formats: a single self-describing JSON schema family with a required
// "kind" field.  Ids are strings, bar pairs are listed explicitly both ways
// and cross-checked by validation, and no value is ever a float.  Emitted
// JSON has sorted keys, so reports and saved artifacts are byte-stable.

#include <fstream>
#include <json.hpp>

#include "serre/blowup.hpp"
#include "serre/gos.hpp"
#include "serre/hat.hpp"

namespace serre {

using Json = nlohmann::json;

namespace io {

inline Json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw error(errc::invalid_argument, "cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw error(errc::invalid_argument, "parse failure in '" + path + "': " + e.what());
  }
  return j;
}

inline void save_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out)
    throw error(errc::invalid_argument, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

inline std::string dirname(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

inline std::string resolve(const std::string& base_dir, const std::string& path) {
  if (!path.empty() && path[0] == '/') return path;
  return base_dir + "/" + path;
}

inline void expect_kind(const Json& j, const std::string& kind,
                        const std::string& what) {
  if (!j.is_object() || !j.contains("kind") || j.at("kind") != kind)
    throw error(errc::invalid_argument,
                what + " must have \"kind\": \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// serre-graph

inline SerreGraph graph_from_json(const Json& j) {
  expect_kind(j, "serre-graph", "graph");
  GraphData data;
  for (const auto& v : j.at("vertices")) data.vertices.push_back(v.get<std::string>());
  for (const auto& d : j.at("darts"))
    data.darts.push_back({d.at("id").get<std::string>(), d.at("bar").get<std::string>(),
                          d.at("from").get<std::string>(), d.at("to").get<std::string>()});
  return SerreGraph::validate(data);
}

inline Json graph_to_json(const SerreGraph& g) {
  Json j;
  j["kind"] = "serre-graph";
  j["vertices"] = Json::array();
  for (const auto& v : g.vertex_ids()) j["vertices"].push_back(v);
  j["darts"] = Json::array();
  for (int d = 0; d < g.num_darts(); ++d) {
    Json dart;
    dart["id"] = g.dart_id(d);
    dart["bar"] = g.dart_id(g.bar(d));
    dart["from"] = g.vertex_id(g.iota(d));
    dart["to"] = g.vertex_id(g.tau(d));
    j["darts"].push_back(dart);
  }
  return j;
}

inline Coloring coloring_from_json(const Json& j) {
  Coloring c;
  if (j.contains("vertex_colors"))
    for (auto& [k, v] : j.at("vertex_colors").items()) c.vertex[k] = v.get<std::string>();
  if (j.contains("dart_colors"))
    for (auto& [k, v] : j.at("dart_colors").items()) c.dart[k] = v.get<std::string>();
  return c;
}

// ---------------------------------------------------------------------------
// permutations as maps over a domain of opaque ids

inline Perm perm_from_json(const Json& j, const std::vector<std::string>& domain) {
  std::map<std::string, int> index;
  for (int i = 0; i < (int)domain.size(); ++i) index[domain[i]] = i;
  Perm p = perm_identity((int)domain.size());
  for (auto& [k, v] : j.items()) {
    auto a = index.find(k);
    auto b = index.find(v.get<std::string>());
    if (a == index.end() || b == index.end())
      throw error(errc::dangling_reference,
                  "permutation mentions '" + k + "' outside the domain");
    p[a->second] = b->second;
  }
  if (!perm_is_bijection(p))
    throw error(errc::invalid_argument, "permutation entry is not a bijection");
  return p;
}

inline Json perm_to_json(const Perm& p, const std::vector<std::string>& domain) {
  Json j = Json::object();
  for (int i = 0; i < (int)p.size(); ++i) j[domain[i]] = domain[p[i]];
  return j;
}

inline PermGroup perm_group_from_json(const Json& j, int element_bound) {
  expect_kind(j, "perm-group", "group");
  std::vector<std::string> domain;
  for (const auto& d : j.at("domain")) domain.push_back(d.get<std::string>());
  std::vector<Perm> gens;
  for (const auto& g : j.at("generators")) gens.push_back(perm_from_json(g, domain));
  return PermGroup(std::move(domain), std::move(gens), element_bound);
}

inline Json perm_group_to_json(const PermGroup& g) {
  Json j;
  j["kind"] = "perm-group";
  j["domain"] = Json::array();
  for (const auto& d : g.domain()) j["domain"].push_back(d);
  j["generators"] = Json::array();
  for (const auto& p : g.generators()) j["generators"].push_back(perm_to_json(p, g.domain()));
  return j;
}

// generators of a subgroup over a fixed parent domain
inline PermGroup subgroup_from_json(const Json& j, const PermGroup& parent) {
  std::vector<Perm> gens;
  for (const auto& g : j) gens.push_back(perm_from_json(g, parent.domain()));
  return parent.with_generators(std::move(gens));
}

// ---------------------------------------------------------------------------
// group-action: the graph is referenced by relative path

struct LoadedAction {
  GroupAction action;
  std::string graph_path;
};

inline std::vector<int> idmap_from_json(const Json& j,
                                        const std::function<int(const std::string&)>& src,
                                        const std::function<int(const std::string&)>& dst,
                                        int size) {
  std::vector<int> m(size, -1);
  for (auto& [k, v] : j.items()) m[src(k)] = dst(v.get<std::string>());
  for (int i = 0; i < size; ++i)
    if (m[i] < 0)
      throw error(errc::invalid_argument, "map entry missing for an element");
  return m;
}

inline LoadedAction action_from_json(const Json& j, const std::string& base_dir,
                                     int element_bound) {
  expect_kind(j, "group-action", "action");
  std::string gpath = resolve(base_dir, j.at("graph").get<std::string>());
  SerreGraph graph = graph_from_json(load_file(gpath));
  PermGroup group = perm_group_from_json(j.at("group"), element_bound);
  std::vector<Perm> vgens, dgens;
  auto vat = [&](const std::string& id) { return graph.vertex_index(id); };
  auto dat = [&](const std::string& id) { return graph.dart_index(id); };
  for (const auto& m : j.at("vertex_maps"))
    vgens.push_back(idmap_from_json(m, vat, vat, graph.num_vertices()));
  for (const auto& m : j.at("dart_maps"))
    dgens.push_back(idmap_from_json(m, dat, dat, graph.num_darts()));
  return {GroupAction(std::move(group), std::move(graph), std::move(vgens),
                      std::move(dgens)),
          gpath};
}

// ---------------------------------------------------------------------------
// graph-of-spaces (inline pieces)

inline GraphOfSpaces gos_from_json(const Json& j) {
  expect_kind(j, "graph-of-spaces", "graph of spaces");
  SerreGraph underlying = graph_from_json(j.at("underlying"));
  std::vector<SerreGraph> vspaces(underlying.num_vertices());
  for (auto& [vid, spec] : j.at("vertex_spaces").items())
    vspaces[underlying.vertex_index(vid)] = graph_from_json(spec);
  auto reps = underlying.geometric_reps();
  std::vector<SerreGraph> espaces(reps.size());
  std::map<int, int> repidx;
  for (int i = 0; i < (int)reps.size(); ++i) repidx[reps[i]] = i;
  for (auto& [did, spec] : j.at("edge_spaces").items()) {
    int d = underlying.dart_index(did);
    if (underlying.rep(d) != d)
      throw error(errc::invalid_argument,
                  "edge spaces are keyed by the lesser dart of each pair");
    espaces[repidx.at(d)] = graph_from_json(spec);
  }
  std::vector<std::vector<int>> av(underlying.num_darts()), ad(underlying.num_darts());
  for (auto& [did, maps] : j.at("attachments").items()) {
    int d = underlying.dart_index(did);
    const SerreGraph& es = espaces[repidx.at(underlying.rep(d))];
    const SerreGraph& vs = vspaces[underlying.tau(d)];
    av[d] = idmap_from_json(
        maps.at("vertices"), [&](const std::string& id) { return es.vertex_index(id); },
        [&](const std::string& id) { return vs.vertex_index(id); }, es.num_vertices());
    ad[d] = idmap_from_json(
        maps.at("darts"), [&](const std::string& id) { return es.dart_index(id); },
        [&](const std::string& id) { return vs.dart_index(id); }, es.num_darts());
  }
  return GraphOfSpaces::validate(std::move(underlying), std::move(vspaces),
                                 std::move(espaces), std::move(av), std::move(ad));
}

inline Json gos_to_json(const GraphOfSpaces& y) {
  Json j;
  j["kind"] = "graph-of-spaces";
  j["underlying"] = graph_to_json(y.underlying());
  j["vertex_spaces"] = Json::object();
  for (int v = 0; v < y.underlying().num_vertices(); ++v)
    j["vertex_spaces"][y.underlying().vertex_id(v)] = graph_to_json(y.vertex_space(v));
  j["edge_spaces"] = Json::object();
  auto reps = y.underlying().geometric_reps();
  for (int i = 0; i < (int)reps.size(); ++i)
    j["edge_spaces"][y.underlying().dart_id(reps[i])] = graph_to_json(y.edge_space(i));
  j["attachments"] = Json::object();
  for (int d = 0; d < y.underlying().num_darts(); ++d) {
    const SerreGraph& es = y.edge_space_of(d);
    const SerreGraph& vs = y.vertex_space(y.underlying().tau(d));
    Json m;
    m["vertices"] = Json::object();
    for (int x = 0; x < es.num_vertices(); ++x)
      m["vertices"][es.vertex_id(x)] = vs.vertex_id(y.attach_vmap(d)[x]);
    m["darts"] = Json::object();
    for (int x = 0; x < es.num_darts(); ++x)
      m["darts"][es.dart_id(x)] = vs.dart_id(y.attach_dmap(d)[x]);
    j["attachments"][y.underlying().dart_id(d)] = m;
  }
  return j;
}

// ---------------------------------------------------------------------------
// graph-morphism between two referenced graphs

struct LoadedMorphism {
  GraphMorphism morphism;
  std::string source_path, target_path;
};

inline LoadedMorphism morphism_from_json(const Json& j, const std::string& base_dir) {
  expect_kind(j, "graph-morphism", "morphism");
  std::string spath = resolve(base_dir, j.at("source").get<std::string>());
  std::string tpath = resolve(base_dir, j.at("target").get<std::string>());
  SerreGraph src = graph_from_json(load_file(spath));
  SerreGraph dst = graph_from_json(load_file(tpath));
  std::map<std::string, std::string> vm, dm;
  for (auto& [k, v] : j.at("vertices").items()) vm[k] = v.get<std::string>();
  for (auto& [k, v] : j.at("darts").items()) dm[k] = v.get<std::string>();
  return {GraphMorphism::from_ids(src, dst, vm, dm), spath, tpath};
}

inline Json morphism_to_json(const GraphMorphism& f, const std::string& source_path,
                             const std::string& target_path) {
  Json j;
  j["kind"] = "graph-morphism";
  j["source"] = source_path;
  j["target"] = target_path;
  j["vertices"] = Json::object();
  for (int v = 0; v < f.source.num_vertices(); ++v)
    j["vertices"][f.source.vertex_id(v)] = f.target.vertex_id(f.vmap[v]);
  j["darts"] = Json::object();
  for (int d = 0; d < f.source.num_darts(); ++d)
    j["darts"][f.source.dart_id(d)] = f.target.dart_id(f.dmap[d]);
  return j;
}

// ---------------------------------------------------------------------------
// gos-morphism and gos-action

inline GoSMorphism gos_morphism_from_json(const Json& j, const std::string& base_dir) {
  expect_kind(j, "gos-morphism", "gos morphism");
  GraphOfSpaces src = gos_from_json(load_file(resolve(base_dir, j.at("source").get<std::string>())));
  GraphOfSpaces dst = gos_from_json(load_file(resolve(base_dir, j.at("target").get<std::string>())));
  const SerreGraph& su = src.underlying();
  const SerreGraph& tu = dst.underlying();
  auto uv = idmap_from_json(
      j.at("underlying").at("vertices"),
      [&](const std::string& id) { return su.vertex_index(id); },
      [&](const std::string& id) { return tu.vertex_index(id); }, su.num_vertices());
  auto ud = idmap_from_json(
      j.at("underlying").at("darts"),
      [&](const std::string& id) { return su.dart_index(id); },
      [&](const std::string& id) { return tu.dart_index(id); }, su.num_darts());
  std::vector<std::vector<int>> vv(su.num_vertices()), vd(su.num_vertices());
  for (auto& [vid, maps] : j.at("vertex_maps").items()) {
    int v = su.vertex_index(vid);
    const SerreGraph& a = src.vertex_space(v);
    const SerreGraph& b = dst.vertex_space(uv[v]);
    vv[v] = idmap_from_json(
        maps.at("vertices"), [&](const std::string& id) { return a.vertex_index(id); },
        [&](const std::string& id) { return b.vertex_index(id); }, a.num_vertices());
    vd[v] = idmap_from_json(
        maps.at("darts"), [&](const std::string& id) { return a.dart_index(id); },
        [&](const std::string& id) { return b.dart_index(id); }, a.num_darts());
  }
  auto reps = su.geometric_reps();
  std::vector<std::vector<int>> ev(reps.size()), ed(reps.size());
  for (auto& [did, maps] : j.at("edge_maps").items()) {
    int d = su.dart_index(did);
    int ei = src.edge_space_index(d);
    const SerreGraph& a = src.edge_space(ei);
    const SerreGraph& b = dst.edge_space_of(ud[reps[ei]]);
    ev[ei] = idmap_from_json(
        maps.at("vertices"), [&](const std::string& id) { return a.vertex_index(id); },
        [&](const std::string& id) { return b.vertex_index(id); }, a.num_vertices());
    ed[ei] = idmap_from_json(
        maps.at("darts"), [&](const std::string& id) { return a.dart_index(id); },
        [&](const std::string& id) { return b.dart_index(id); }, a.num_darts());
  }
  return GoSMorphism::validate(std::move(src), std::move(dst), uv, ud, vv, vd, ev, ed);
}

inline std::vector<GoSMorphism> gos_action_from_json(const Json& j,
                                                     const std::string& base_dir,
                                                     GraphOfSpaces* out_gos) {
  expect_kind(j, "gos-action", "gos action");
  GraphOfSpaces y = gos_from_json(load_file(resolve(base_dir, j.at("gos").get<std::string>())));
  std::vector<GoSMorphism> gens;
  const SerreGraph& u = y.underlying();
  for (const auto& gen : j.at("generators")) {
    auto uv = idmap_from_json(
        gen.at("underlying").at("vertices"),
        [&](const std::string& id) { return u.vertex_index(id); },
        [&](const std::string& id) { return u.vertex_index(id); }, u.num_vertices());
    auto ud = idmap_from_json(
        gen.at("underlying").at("darts"),
        [&](const std::string& id) { return u.dart_index(id); },
        [&](const std::string& id) { return u.dart_index(id); }, u.num_darts());
    std::vector<std::vector<int>> vv(u.num_vertices()), vd(u.num_vertices());
    for (auto& [vid, maps] : gen.at("vertex_maps").items()) {
      int v = u.vertex_index(vid);
      const SerreGraph& a = y.vertex_space(v);
      const SerreGraph& b = y.vertex_space(uv[v]);
      vv[v] = idmap_from_json(
          maps.at("vertices"), [&](const std::string& id) { return a.vertex_index(id); },
          [&](const std::string& id) { return b.vertex_index(id); }, a.num_vertices());
      vd[v] = idmap_from_json(
          maps.at("darts"), [&](const std::string& id) { return a.dart_index(id); },
          [&](const std::string& id) { return b.dart_index(id); }, a.num_darts());
    }
    auto reps = u.geometric_reps();
    std::vector<std::vector<int>> ev(reps.size()), ed(reps.size());
    for (auto& [did, maps] : gen.at("edge_maps").items()) {
      int d = u.dart_index(did);
      int ei = y.edge_space_index(d);
      const SerreGraph& a = y.edge_space(ei);
      const SerreGraph& b = y.edge_space_of(ud[reps[ei]]);
      ev[ei] = idmap_from_json(
          maps.at("vertices"), [&](const std::string& id) { return a.vertex_index(id); },
          [&](const std::string& id) { return b.vertex_index(id); }, a.num_vertices());
      ed[ei] = idmap_from_json(
          maps.at("darts"), [&](const std::string& id) { return a.dart_index(id); },
          [&](const std::string& id) { return b.dart_index(id); }, a.num_darts());
    }
    gens.push_back(GoSMorphism::validate(y, y, uv, ud, vv, vd, ev, ed));
  }
  if (out_gos) *out_gos = y;
  return gens;
}

// ---------------------------------------------------------------------------
// vertex-partition, blowup-input, subgroup-family, hat-cover-data

inline VertexPartition partition_from_json(const Json& j, const SerreGraph& g) {
  expect_kind(j, "vertex-partition", "partition");
  std::vector<std::vector<int>> blocks;
  for (const auto& b : j.at("blocks")) {
    std::vector<int> block;
    for (const auto& v : b) block.push_back(g.vertex_index(v.get<std::string>()));
    blocks.push_back(std::move(block));
  }
  return VertexPartition::from_blocks(g.num_vertices(), std::move(blocks));
}

inline Json partition_to_json(const VertexPartition& p, const SerreGraph& g) {
  Json j;
  j["kind"] = "vertex-partition";
  j["blocks"] = Json::array();
  for (const auto& b : p.blocks) {
    Json block = Json::array();
    for (int v : b) block.push_back(g.vertex_id(v));
    j["blocks"].push_back(block);
  }
  return j;
}

struct LoadedBlowupInput {
  BlowupInput input;
  std::string action_path;
};

inline LoadedBlowupInput blowup_input_from_json(const Json& j,
                                                const std::string& base_dir,
                                                int element_bound) {
  expect_kind(j, "blowup-input", "blowup input");
  std::string apath = resolve(base_dir, j.at("action").get<std::string>());
  Json aj = load_file(apath);
  auto loaded = action_from_json(aj, dirname(apath), element_bound);
  BlowupInput in;
  in.action = loaded.action;
  const SerreGraph& t = in.action.graph();
  for (const auto& v : j.at("vertex_reps"))
    in.vertex_reps.push_back(t.vertex_index(v.get<std::string>()));
  for (const auto& e : j.at("edge_reps"))
    in.edge_reps.push_back(t.rep(t.dart_index(e.get<std::string>())));
  const auto& dom = in.action.group().domain();
  std::vector<Perm> kgens;
  for (const auto& g : j.at("k_generators")) kgens.push_back(perm_from_json(g, dom));
  in.k = in.action.group().with_generators(std::move(kgens));
  if (j.contains("s_vertex"))
    for (auto& [vid, list] : j.at("s_vertex").items()) {
      std::vector<Perm> s;
      for (const auto& g : list) s.push_back(perm_from_json(g, dom));
      in.s_vertex[t.vertex_index(vid)] = s;
    }
  if (j.contains("s_edge"))
    for (auto& [did, list] : j.at("s_edge").items()) {
      std::vector<Perm> s;
      for (const auto& g : list) s.push_back(perm_from_json(g, dom));
      in.s_edge[t.rep(t.dart_index(did))] = s;
    }
  if (j.contains("f"))
    for (const auto& g : j.at("f")) in.f.push_back(perm_from_json(g, dom));
  return {in, apath};
}

inline Json blowup_input_to_json(const BlowupInput& in, const std::string& action_path) {
  Json j;
  j["kind"] = "blowup-input";
  j["action"] = action_path;
  const SerreGraph& t = in.action.graph();
  const auto& dom = in.action.group().domain();
  j["vertex_reps"] = Json::array();
  for (int v : in.vertex_reps) j["vertex_reps"].push_back(t.vertex_id(v));
  j["edge_reps"] = Json::array();
  for (int e : in.edge_reps) j["edge_reps"].push_back(t.dart_id(e));
  j["k_generators"] = Json::array();
  for (const auto& g : in.k.generators()) j["k_generators"].push_back(perm_to_json(g, dom));
  j["s_vertex"] = Json::object();
  for (auto& [v, list] : in.s_vertex) {
    Json arr = Json::array();
    for (const auto& g : list) arr.push_back(perm_to_json(g, dom));
    j["s_vertex"][t.vertex_id(v)] = arr;
  }
  j["s_edge"] = Json::object();
  for (auto& [e, list] : in.s_edge) {
    Json arr = Json::array();
    for (const auto& g : list) arr.push_back(perm_to_json(g, dom));
    j["s_edge"][t.dart_id(e)] = arr;
  }
  j["f"] = Json::array();
  for (const auto& g : in.f) j["f"].push_back(perm_to_json(g, dom));
  return j;
}

inline SubgroupFamily family_from_json(const Json& j, const GroupAction& action) {
  expect_kind(j, "subgroup-family", "subgroup family");
  const SerreGraph& t = action.graph();
  const auto& dom = action.group().domain();
  SubgroupFamily fam;
  for (auto& [vid, gens] : j.at("vertex").items()) {
    std::vector<Perm> ps;
    for (const auto& g : gens) ps.push_back(perm_from_json(g, dom));
    fam.vertex.emplace(t.vertex_index(vid), action.group().with_generators(ps));
  }
  for (auto& [did, gens] : j.at("edge").items()) {
    std::vector<Perm> ps;
    for (const auto& g : gens) ps.push_back(perm_from_json(g, dom));
    fam.edge.emplace(t.rep(t.dart_index(did)), action.group().with_generators(ps));
  }
  return fam;
}

inline HatCoverData hat_from_json(const Json& j, int element_bound) {
  expect_kind(j, "hat-cover-data", "hat cover data");
  HatCoverData data;
  data.y = gos_from_json(j.at("gos"));
  const SerreGraph& u = data.y.underlying();
  auto group_table = [&](const Json& tbl, const SerreGraph& piece) {
    std::vector<Perm> gens;
    auto dom = aut_domain(piece);
    for (const auto& g : tbl) gens.push_back(perm_from_json(g, dom));
    return PermGroup(dom, gens, element_bound);
  };
  data.q_v.resize(u.num_vertices(), PermGroup::trivial({"x"}));
  data.gamma1_v.resize(u.num_vertices(), PermGroup::trivial({"x"}));
  data.gamma2_v.resize(u.num_vertices(), PermGroup::trivial({"x"}));
  data.qhat_v.resize(u.num_vertices(), PermGroup::trivial({"x"}));
  for (auto& [vid, tbl] : j.at("q_v").items())
    data.q_v[u.vertex_index(vid)] = group_table(tbl, data.y.vertex_space(u.vertex_index(vid)));
  for (auto& [vid, tbl] : j.at("gamma1_v").items())
    data.gamma1_v[u.vertex_index(vid)] =
        group_table(tbl, data.y.vertex_space(u.vertex_index(vid)));
  for (auto& [vid, tbl] : j.at("gamma2_v").items())
    data.gamma2_v[u.vertex_index(vid)] =
        group_table(tbl, data.y.vertex_space(u.vertex_index(vid)));
  for (auto& [vid, tbl] : j.at("qhat_v").items())
    data.qhat_v[u.vertex_index(vid)] =
        group_table(tbl, data.y.vertex_space(u.vertex_index(vid)));
  data.q_e.resize(data.y.num_edge_spaces(), PermGroup::trivial({"x"}));
  for (auto& [did, tbl] : j.at("q_e").items()) {
    int ei = data.y.edge_space_index(u.dart_index(did));
    data.q_e[ei] = group_table(tbl, data.y.edge_space(ei));
  }
  return data;
}

}  // namespace io

}  // namespace serre
