#pragma once
// Command-line front end: schema-validated file I/O, pipeline commands, DOT
// emission and deterministic JSON reports.  Exit codes: 0 = success, 2 =
// verified negative (for example NoCommonCover), 1 = input or usage error.

#include <CLI11.hpp>

#include "serre/dot.hpp"
#include "serre/imprimitivity.hpp"
#include "serre/json_io.hpp"
#include "serre/leighton.hpp"

namespace serre::cli {

struct Ctx {
  int element_bound = kDefaultElementBound;
  int max_degree = 6;
  long long seed = 0;
  std::string dot_path, report_path, out_path;
  std::string command;
  std::vector<std::string> inputs;
  Json result = Json::object();
  std::string dot;  // rendered DOT when a command produced a graph
  int exit_code = 0;
  std::ostream* out = nullptr;
};

inline void emit(Ctx& ctx) {
  if (!ctx.dot_path.empty() && !ctx.dot.empty()) {
    std::ofstream f(ctx.dot_path);
    f << ctx.dot;
  }
  if (!ctx.report_path.empty()) {
    Json report;
    report["command"] = ctx.command;
    report["config"] = {{"element_bound", ctx.element_bound},
                        {"max_degree", ctx.max_degree},
                        {"seed", ctx.seed}};
    report["inputs"] = ctx.inputs;
    report["result"] = ctx.result;
    io::save_file(ctx.report_path, report);
  }
}

inline SerreGraph load_graph(Ctx& ctx, const std::string& path) {
  ctx.inputs.push_back(path);
  return io::graph_from_json(io::load_file(path));
}

inline Coloring load_colors(Ctx& ctx, const std::string& path) {
  if (path.empty()) return {};
  ctx.inputs.push_back(path);
  return io::coloring_from_json(io::load_file(path));
}

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"finite Serre graphs, group actions, blowups and common covers"};
  app.require_subcommand(1);
  Ctx ctx;
  ctx.out = &out;
  app.add_option("--element-bound", ctx.element_bound, "group enumeration cap");
  app.add_option("--max-degree", ctx.max_degree, "cover search degree cap");
  app.add_option("--seed", ctx.seed, "seed echoed into reports");
  app.add_option("--dot", ctx.dot_path, "write DOT for the primary graph output");
  app.add_option("--report", ctx.report_path, "write a deterministic JSON report");

  auto say = [&](const std::string& line) { (*ctx.out) << line << "\n"; };

  // ----- graph ------------------------------------------------------------
  auto* graph = app.add_subcommand("graph", "Serre graph operations");
  {
    static std::string file;
    auto* c = graph->add_subcommand("validate", "validate a serre-graph file");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "graph validate";
      SerreGraph g = load_graph(ctx, file);
      ctx.result = {{"vertices", g.num_vertices()},
                    {"darts", g.num_darts()},
                    {"geometric_edges", g.num_geometric_edges()},
                    {"connected", g.is_connected()},
                    {"tree", g.is_tree()}};
      ctx.dot = to_dot(g);
      say("valid: " + std::to_string(g.num_vertices()) + " vertices, " +
          std::to_string(g.num_darts()) + " darts");
    });
  }
  {
    static std::string file;
    auto* c = graph->add_subcommand("subdivide", "barycentric subdivision");
    c->add_option("file", file)->required();
    c->add_option("--out", ctx.out_path, "write the subdivided graph");
    c->callback([&] {
      ctx.command = "graph subdivide";
      SerreGraph g = load_graph(ctx, file);
      auto sub = barycentric_subdivision(g);
      ctx.result = {{"vertices", sub.graph.num_vertices()},
                    {"darts", sub.graph.num_darts()}};
      ctx.dot = to_dot(sub.graph);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(sub.graph));
      say("subdivided: " + std::to_string(sub.graph.num_vertices()) + " vertices");
    });
  }
  {
    static std::string file, pfile;
    static bool keep_multi = false;
    auto* c = graph->add_subcommand("quotient", "quotient by a vertex partition");
    c->add_option("file", file)->required();
    c->add_option("--partition", pfile)->required();
    c->add_flag("--keep-multi", keep_multi, "preserve loops and multiple edges");
    c->add_option("--out", ctx.out_path);
    c->callback([&] {
      ctx.command = "graph quotient";
      SerreGraph g = load_graph(ctx, file);
      ctx.inputs.push_back(pfile);
      auto p = io::partition_from_json(io::load_file(pfile), g);
      auto q = quotient_by_partition(g, p, keep_multi);
      ctx.result = {{"blocks", p.num_blocks()},
                    {"vertices", q.graph.num_vertices()},
                    {"darts", q.graph.num_darts()}};
      ctx.dot = to_dot(q.graph);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(q.graph));
      say("quotient: " + std::to_string(q.graph.num_vertices()) + " vertices");
    });
  }

  // ----- group ------------------------------------------------------------
  auto* group = app.add_subcommand("group", "permutation group operations");
  {
    static std::string file, subset;
    auto* c = group->add_subcommand("orbits", "orbit partition");
    c->add_option("file", file)->required();
    c->add_option("--subset", subset, "comma-separated domain elements");
    c->callback([&] {
      ctx.command = "group orbits";
      ctx.inputs.push_back(file);
      auto g = io::perm_group_from_json(io::load_file(file), ctx.element_bound);
      std::vector<int> sub;
      if (subset.empty()) {
        for (int i = 0; i < g.domain_size(); ++i) sub.push_back(i);
      } else {
        std::stringstream ss(subset);
        std::string tok;
        while (std::getline(ss, tok, ',')) sub.push_back(g.index_of(tok));
      }
      Json orbits = Json::array();
      for (const auto& block : orbit_blocks(g, sub)) {
        Json b = Json::array();
        for (int x : block) b.push_back(g.domain()[x]);
        orbits.push_back(b);
      }
      ctx.result = {{"orbits", orbits}};
      say(std::to_string(ctx.result["orbits"].size()) + " orbits");
    });
  }
  {
    static std::string file, point;
    auto* c = group->add_subcommand("stab", "point stabilizer");
    c->add_option("file", file)->required();
    c->add_option("--point", point)->required();
    c->callback([&] {
      ctx.command = "group stab";
      ctx.inputs.push_back(file);
      auto g = io::perm_group_from_json(io::load_file(file), ctx.element_bound);
      auto st = point_stabilizer(g, g.index_of(point));
      ctx.result = {{"order", st.order()},
                    {"group", io::perm_group_to_json(st)}};
      say("stabilizer order " + std::to_string(st.order()));
    });
  }
  {
    static std::string file;
    auto* c = group->add_subcommand("blocks", "minimal block systems");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "group blocks";
      ctx.inputs.push_back(file);
      auto g = io::perm_group_from_json(io::load_file(file), ctx.element_bound);
      auto systems = minimal_block_systems(g);
      Json arr = Json::array();
      for (const auto& p : systems) {
        Json sys = Json::array();
        for (const auto& b : p.blocks) {
          Json blk = Json::array();
          for (int x : b) blk.push_back(g.domain()[x]);
          sys.push_back(blk);
        }
        arr.push_back(sys);
      }
      ctx.result = {{"systems", arr}, {"primitive", systems.empty()}};
      say(systems.empty() ? "primitive" : std::to_string(systems.size()) + " systems");
    });
  }
  {
    static std::string file;
    auto* c = group->add_subcommand("kernel", "kernel of a graph action");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "group kernel";
      ctx.inputs.push_back(file);
      auto loaded = io::action_from_json(io::load_file(file), io::dirname(file),
                                         ctx.element_bound);
      auto k = loaded.action.kernel();
      ctx.result = {{"order", k.order()}, {"group", io::perm_group_to_json(k)}};
      say("kernel order " + std::to_string(k.order()));
    });
  }

  // ----- aut --------------------------------------------------------------
  auto* aut = app.add_subcommand("aut", "automorphism groups");
  {
    static std::string file, colors;
    auto* c = aut->add_subcommand("group", "full automorphism group");
    c->add_option("file", file)->required();
    c->add_option("--colors", colors, "coloring file");
    c->callback([&] {
      ctx.command = "aut group";
      SerreGraph g = load_graph(ctx, file);
      Coloring col = load_colors(ctx, colors);
      auto grp = automorphism_group(g, colors.empty() ? nullptr : &col,
                                    ctx.element_bound);
      ctx.result = {{"order", grp.order()}, {"group", io::perm_group_to_json(grp)}};
      say("automorphism group order " + std::to_string(grp.order()));
    });
  }
  {
    static std::string file;
    auto* c = aut->add_subcommand("orbit-bound", "max vertex-stabilizer orbit");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "aut orbit-bound";
      ctx.inputs.push_back(file);
      auto loaded = io::action_from_json(io::load_file(file), io::dirname(file),
                                         ctx.element_bound);
      auto ob = vertex_stabilizer_orbit_bound(loaded.action);
      ctx.result = {{"bound", ob.bound},
                    {"x", loaded.action.graph().vertex_id(ob.x)},
                    {"y", loaded.action.graph().vertex_id(ob.y)}};
      say("bound " + std::to_string(ob.bound));
    });
  }

  // ----- imprim -----------------------------------------------------------
  auto* imprim = app.add_subcommand("imprim", "imprimitivity systems");
  {
    static std::string file, kfile;
    auto* c = imprim->add_subcommand("from-normal", "K-orbit blocks");
    c->add_option("file", file)->required();
    c->add_option("--k", kfile)->required();
    c->callback([&] {
      ctx.command = "imprim from-normal";
      ctx.inputs.push_back(file);
      ctx.inputs.push_back(kfile);
      auto loaded = io::action_from_json(io::load_file(file), io::dirname(file),
                                         ctx.element_bound);
      auto kj = io::load_file(kfile);
      auto k = io::subgroup_from_json(kj.at("generators"), loaded.action.group());
      auto p = imprimitivity_from_normal(loaded.action, k);
      ctx.result = {{"blocks", io::partition_to_json(p, loaded.action.graph())["blocks"]},
                    {"num_blocks", p.num_blocks()}};
      if (!ctx.out_path.empty())
        io::save_file(ctx.out_path, io::partition_to_json(p, loaded.action.graph()));
      say(std::to_string(p.num_blocks()) + " blocks");
    });
    c->add_option("--out", ctx.out_path, "write the partition");
  }
  {
    static std::string file, pfile;
    auto* c = imprim->add_subcommand("quotient-action", "induced quotient action");
    c->add_option("file", file)->required();
    c->add_option("--partition", pfile)->required();
    c->add_option("--out", ctx.out_path, "write the quotient graph");
    c->callback([&] {
      ctx.command = "imprim quotient-action";
      ctx.inputs.push_back(file);
      ctx.inputs.push_back(pfile);
      auto loaded = io::action_from_json(io::load_file(file), io::dirname(file),
                                         ctx.element_bound);
      auto p = io::partition_from_json(io::load_file(pfile), loaded.action.graph());
      auto iq = induced_quotient_action(loaded.action, p);
      ctx.result = {{"quotient_vertices", iq.quotient.graph.num_vertices()},
                    {"kernel_order", iq.kernel.order()},
                    {"induced_order",
                     loaded.action.group().order() / iq.kernel.order()},
                    {"kernel", io::perm_group_to_json(iq.kernel)}};
      ctx.dot = to_dot(iq.quotient.graph);
      if (!ctx.out_path.empty())
        io::save_file(ctx.out_path, io::graph_to_json(iq.quotient.graph));
      say("kernel order " + std::to_string(iq.kernel.order()));
    });
  }

  // ----- blowup -----------------------------------------------------------
  auto* blowup = app.add_subcommand("blowup", "tree action blowups");
  {
    static std::string file;
    auto* c = blowup->add_subcommand("normalize", "normalize a blowup input");
    c->add_option("file", file)->required();
    c->add_option("--out", ctx.out_path, "write the normalized input");
    c->callback([&] {
      ctx.command = "blowup normalize";
      ctx.inputs.push_back(file);
      auto loaded = io::blowup_input_from_json(io::load_file(file), io::dirname(file),
                                               ctx.element_bound);
      NormalizeReport rep;
      auto norm = normalize_input(loaded.input, &rep);
      Json added = Json::object();
      for (auto& [k, v] : rep.s_added) added[k] = v;
      ctx.result = {{"k_order", norm.k.order()},
                    {"k_changed", rep.k_changed},
                    {"s_added", added},
                    {"f_added", rep.f_added},
                    {"f_size", (int)norm.f.size()}};
      if (!ctx.out_path.empty())
        io::save_file(ctx.out_path, io::blowup_input_to_json(norm, loaded.action_path));
      say("normalized; |K| = " + std::to_string(norm.k.order()));
    });
  }
  {
    static std::string file;
    static bool verify = false;
    auto* c = blowup->add_subcommand("construct", "construct the blowup");
    c->add_option("file", file)->required();
    c->add_flag("--verify", verify, "run the verifier on the result");
    c->add_option("--out", ctx.out_path, "write the blowup graph");
    c->callback([&] {
      ctx.command = "blowup construct";
      ctx.inputs.push_back(file);
      auto loaded = io::blowup_input_from_json(io::load_file(file), io::dirname(file),
                                               ctx.element_bound);
      auto norm = normalize_input(loaded.input);
      auto r = construct_blowup(norm);
      int t1 = 0, t2 = 0;
      for (int d = 0; d < r.x.num_darts(); ++d)
        (r.edge_type[d] == 1 ? t1 : t2) += 1;
      ctx.result = {{"vertices", r.x.num_vertices()},
                    {"cosets", r.coset_count},
                    {"omega", r.omega_size},
                    {"type_i_darts", t1},
                    {"type_ii_darts", t2}};
      std::map<int, std::string> dcolors;
      for (int d = 0; d < r.x.num_darts(); ++d)
        dcolors[d] = r.edge_type[d] == 1 ? "blue" : "red";
      std::map<int, std::string> vcolors;
      for (int v = 0; v < r.x.num_vertices(); ++v)
        vcolors[v] = "/set312/" + std::to_string(1 + r.p_vertex[v] % 12);
      ctx.dot = to_dot(r.x, vcolors, dcolors);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(r.x));
      if (verify) {
        auto rep = verify_blowup(r);
        Json checks = Json::array();
        for (const auto& chk : rep.checks)
          checks.push_back({{"name", chk.name}, {"ok", chk.ok}, {"witness", chk.witness}});
        ctx.result["verify"] = checks;
        ctx.result["verified"] = rep.passed();
        if (!rep.passed()) ctx.exit_code = 2;
      }
      say("|VX| = " + std::to_string(r.x.num_vertices()) + " = " +
          std::to_string(r.coset_count) + " x " + std::to_string(r.omega_size));
    });
  }
  {
    static std::string file;
    auto* c = blowup->add_subcommand("verify", "construct and verify");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "blowup verify";
      ctx.inputs.push_back(file);
      auto loaded = io::blowup_input_from_json(io::load_file(file), io::dirname(file),
                                               ctx.element_bound);
      auto r = construct_blowup(normalize_input(loaded.input));
      auto rep = verify_blowup(r);
      Json checks = Json::array();
      for (const auto& chk : rep.checks)
        checks.push_back({{"name", chk.name}, {"ok", chk.ok}, {"witness", chk.witness}});
      ctx.result = {{"checks", checks}, {"passed", rep.passed()}};
      if (!rep.passed()) ctx.exit_code = 2;
      say(rep.passed() ? "verified" : ("failed: " + rep.failed()->name));
    });
  }
  {
    static std::string file, fam;
    auto* c = blowup->add_subcommand("refine-tree", "insert link-orbit vertices");
    c->add_option("file", file)->required();
    c->add_option("--family", fam)->required();
    c->add_option("--out", ctx.out_path, "write the refined tree");
    c->callback([&] {
      ctx.command = "blowup refine-tree";
      ctx.inputs.push_back(file);
      ctx.inputs.push_back(fam);
      auto loaded = io::action_from_json(io::load_file(file), io::dirname(file),
                                         ctx.element_bound);
      auto family = io::family_from_json(io::load_file(fam), loaded.action);
      auto r = refine_tree(loaded.action, family.vertex);
      int inserted = 0;
      for (int t : r.vertex_type)
        if (t == 2) ++inserted;
      ctx.result = {{"vertices", r.tree.num_vertices()},
                    {"inserted", inserted}};
      ctx.dot = to_dot(r.tree);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(r.tree));
      say("refined tree has " + std::to_string(r.tree.num_vertices()) + " vertices");
    });
  }
  {
    static std::string file, fam;
    auto* c = blowup->add_subcommand("quotient", "imprimitivity quotient of a blowup");
    c->add_option("file", file)->required();
    c->add_option("--family", fam)->required();
    c->add_option("--out", ctx.out_path, "write the quotient graph");
    c->callback([&] {
      ctx.command = "blowup quotient";
      ctx.inputs.push_back(file);
      ctx.inputs.push_back(fam);
      auto loaded = io::blowup_input_from_json(io::load_file(file), io::dirname(file),
                                               ctx.element_bound);
      auto r = construct_blowup(normalize_input(loaded.input));
      auto family = io::family_from_json(io::load_file(fam), loaded.input.action);
      auto q = blowup_imprimitivity_quotient(r, family);
      auto rep = verify_blowup(q.result);
      Json products = Json::object();
      for (auto& [e, is] : q.edge_is_product)
        products[r.tree.dart_id(e)] = is;
      ctx.result = {{"vertices", q.result.x.num_vertices()},
                    {"verified", rep.passed()},
                    {"edge_is_product", products}};
      ctx.dot = to_dot(q.result.x);
      if (!ctx.out_path.empty())
        io::save_file(ctx.out_path, io::graph_to_json(q.result.x));
      if (!rep.passed()) ctx.exit_code = 2;
      say("quotient has " + std::to_string(q.result.x.num_vertices()) + " vertices");
    });
  }

  // ----- gos --------------------------------------------------------------
  auto* gos = app.add_subcommand("gos", "graphs of spaces");
  {
    static std::string file;
    auto* c = gos->add_subcommand("total", "total space");
    c->add_option("file", file)->required();
    c->add_option("--out", ctx.out_path, "write the total space graph");
    c->callback([&] {
      ctx.command = "gos total";
      ctx.inputs.push_back(file);
      auto y = io::gos_from_json(io::load_file(file));
      auto t = total_space(y);
      ctx.result = {{"vertices", t.graph.num_vertices()},
                    {"darts", t.graph.num_darts()},
                    {"connected", t.graph.is_connected()}};
      std::map<int, std::string> vcolors;
      for (int v = 0; v < t.graph.num_vertices(); ++v)
        vcolors[v] = t.location[v].kind == PieceLocation::vertex_piece ? "white" : "gray";
      ctx.dot = to_dot(t.graph, vcolors);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(t.graph));
      say("total space has " + std::to_string(t.graph.num_vertices()) + " vertices");
    });
  }
  {
    static std::string file;
    auto* c = gos->add_subcommand("check-cover", "verify a gos covering");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "gos check-cover";
      ctx.inputs.push_back(file);
      auto f = io::gos_morphism_from_json(io::load_file(file), io::dirname(file));
      auto rep = check_gos_covering(f);
      ctx.result = {{"covering", rep.covering},
                    {"degree", rep.degree},
                    {"witness", rep.witness}};
      if (!rep.covering) ctx.exit_code = 2;
      say(rep.covering ? "covering of degree " + std::to_string(rep.degree)
                       : "not a covering: " + rep.witness);
    });
  }
  {
    static std::string f1, f2;
    auto* c = gos->add_subcommand("fiber-product", "fiber product of two morphisms");
    c->add_option("first", f1)->required();
    c->add_option("second", f2)->required();
    c->add_option("--out", ctx.out_path, "write the fiber product graph");
    c->callback([&] {
      ctx.command = "gos fiber-product";
      ctx.inputs.push_back(f1);
      ctx.inputs.push_back(f2);
      auto m1 = io::morphism_from_json(io::load_file(f1), io::dirname(f1));
      auto m2 = io::morphism_from_json(io::load_file(f2), io::dirname(f2));
      auto fp = fiber_product(m1.morphism, m2.morphism);
      Json comps = Json::array();
      for (auto& comp : fp.split())
        comps.push_back({{"vertices", comp.graph.num_vertices()},
                         {"proj1_covering", (bool)is_covering(comp.proj1).covering},
                         {"proj2_covering", (bool)is_covering(comp.proj2).covering}});
      ctx.result = {{"vertices", fp.graph.num_vertices()},
                    {"components", comps}};
      ctx.dot = to_dot(fp.graph);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(fp.graph));
      say(std::to_string(fp.components.size()) + " components");
    });
  }
  {
    static std::string file;
    auto* c = gos->add_subcommand("quotient", "quotient by a free gos action");
    c->add_option("file", file)->required();
    c->add_option("--out", ctx.out_path, "write the quotient gos");
    c->callback([&] {
      ctx.command = "gos quotient";
      ctx.inputs.push_back(file);
      GraphOfSpaces y;
      auto gens = io::gos_action_from_json(io::load_file(file), io::dirname(file), &y);
      auto q = quotient_gos(y, gens, ctx.element_bound);
      auto rep = check_gos_covering(q.projection);
      ctx.result = {{"group_order", q.group_order},
                    {"covering", rep.covering},
                    {"degree", rep.degree}};
      ctx.dot = to_dot(q.quotient.underlying());
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::gos_to_json(q.quotient));
      if (!rep.covering) ctx.exit_code = 2;
      say("quotient by a group of order " + std::to_string(q.group_order));
    });
  }
  {
    static std::string file;
    auto* c = gos->add_subcommand("deck", "deck group of a gos covering");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "gos deck";
      ctx.inputs.push_back(file);
      auto f = io::gos_morphism_from_json(io::load_file(file), io::dirname(file));
      auto deck = deck_group(f, ctx.element_bound);
      ctx.result = {{"order", (int)deck.elements.size()}, {"regular", deck.regular}};
      say("deck order " + std::to_string(deck.elements.size()) +
          (deck.regular ? ", regular" : ", not regular"));
    });
  }

  // ----- leighton ---------------------------------------------------------
  auto* leighton = app.add_subcommand("leighton", "degree refinement and common covers");
  {
    static std::string file, colors;
    auto* c = leighton->add_subcommand("refine", "stable degree refinement");
    c->add_option("file", file)->required();
    c->add_option("--colors", colors);
    c->callback([&] {
      ctx.command = "leighton refine";
      SerreGraph g = load_graph(ctx, file);
      Coloring col = load_colors(ctx, colors);
      auto p = degree_refinement(g, colors.empty() ? nullptr : &col);
      Json sizes = Json::array();
      for (long long s : p.class_size) sizes.push_back(s);
      ctx.result = {{"classes", p.num_vclasses}, {"sizes", sizes}, {"depth", p.depth}};
      say(std::to_string(p.num_vclasses) + " classes");
    });
  }
  {
    static std::string f1, f2, c1, c2;
    auto* c = leighton->add_subcommand("common-cover", "construct a common cover");
    c->add_option("first", f1)->required();
    c->add_option("second", f2)->required();
    c->add_option("--colors1", c1);
    c->add_option("--colors2", c2);
    c->add_option("--out", ctx.out_path, "write the common cover");
    c->callback([&] {
      ctx.command = "leighton common-cover";
      SerreGraph g1 = load_graph(ctx, f1);
      SerreGraph g2 = load_graph(ctx, f2);
      CommonCoverOptions opts;
      opts.max_degree = ctx.max_degree;
      if (!c1.empty() || !c2.empty()) {
        opts.colored = true;
        opts.c1 = load_colors(ctx, c1);
        opts.c2 = load_colors(ctx, c2);
      }
      auto cc = common_cover_graphs(g1, g2, opts);
      ctx.result = {{"vertices", cc.z.num_vertices()},
                    {"degree1", is_covering(cc.p1).degree},
                    {"degree2", is_covering(cc.p2).degree},
                    {"strategy", cc.strategy}};
      ctx.dot = to_dot(cc.z);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(cc.z));
      say("common cover with " + std::to_string(cc.z.num_vertices()) + " vertices (" +
          cc.strategy + ")");
    });
  }
  {
    static std::string f1, f2;
    auto* c = leighton->add_subcommand("oracle", "minimal common cover by brute force");
    c->add_option("first", f1)->required();
    c->add_option("second", f2)->required();
    c->add_option("--out", ctx.out_path, "write the minimal cover");
    c->callback([&] {
      ctx.command = "leighton oracle";
      SerreGraph g1 = load_graph(ctx, f1);
      SerreGraph g2 = load_graph(ctx, f2);
      auto r = brute_force_common_cover(g1, g2, ctx.max_degree);
      if (!r) {
        ctx.result = {{"found", false}, {"reason", "NoCommonCover: profile mismatch"}};
        ctx.exit_code = 2;
        say("NoCommonCover: profile mismatch");
        return;
      }
      ctx.result = {{"found", true},
                    {"vertices", r->z.num_vertices()},
                    {"degree1", is_covering(r->p1).degree},
                    {"degree2", is_covering(r->p2).degree}};
      ctx.dot = to_dot(r->z);
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::graph_to_json(r->z));
      say("minimal common cover has " + std::to_string(r->z.num_vertices()) +
          " vertices");
    });
  }
  {
    static std::string f1, f2;
    auto* c = leighton->add_subcommand("gos-cover", "common cover of graphs of spaces");
    c->add_option("first", f1)->required();
    c->add_option("second", f2)->required();
    c->add_option("--out", ctx.out_path, "write the common cover gos");
    c->callback([&] {
      ctx.command = "leighton gos-cover";
      ctx.inputs.push_back(f1);
      ctx.inputs.push_back(f2);
      auto y1 = io::gos_from_json(io::load_file(f1));
      auto y2 = io::gos_from_json(io::load_file(f2));
      CommonCoverOptions opts;
      opts.max_degree = ctx.max_degree;
      auto cc = common_cover_gos(y1, y2, opts);
      ctx.result = {{"underlying_vertices", cc.z.underlying().num_vertices()},
                    {"degree1", check_gos_covering(cc.p1).degree},
                    {"degree2", check_gos_covering(cc.p2).degree}};
      ctx.dot = to_dot(cc.z.underlying());
      if (!ctx.out_path.empty()) io::save_file(ctx.out_path, io::gos_to_json(cc.z));
      say("common cover over " + std::to_string(cc.z.underlying().num_vertices()) +
          " underlying vertices");
    });
  }
  auto* hat = leighton->add_subcommand("hat", "hat-cover pipeline");
  {
    static std::string file;
    auto* c = hat->add_subcommand("verify", "verify hat-cover conditions");
    c->add_option("file", file)->required();
    c->callback([&] {
      ctx.command = "leighton hat verify";
      ctx.inputs.push_back(file);
      auto data = io::hat_from_json(io::load_file(file), ctx.element_bound);
      auto checks = verify_hat_conditions(data);
      Json arr = Json::array();
      bool all = true;
      for (const auto& chk : checks) {
        arr.push_back({{"clause", chk.clause}, {"ok", chk.ok}, {"witness", chk.witness}});
        all = all && chk.ok;
      }
      ctx.result = {{"checks", arr}, {"passed", all}};
      if (all) {
        auto glue = verify_and_glue_hat(data);
        Json decks = Json::array();
        for (size_t v = 0; v < glue.deck1_order.size(); ++v)
          decks.push_back({{"deck1", glue.deck1_order[v]}, {"deck2", glue.deck2_order[v]}});
        ctx.result["deck_orders"] = decks;
      } else {
        ctx.exit_code = 2;
      }
      say(all ? "all conditions pass" : "conditions failed");
    });
  }
  {
    static std::string file, base;
    static int radius = 1;
    auto* c = hat->add_subcommand("ball", "assemble a tree-of-spaces ball");
    c->add_option("file", file)->required();
    c->add_option("--radius", radius);
    c->add_option("--base", base, "base vertex id");
    c->callback([&] {
      ctx.command = "leighton hat ball";
      ctx.inputs.push_back(file);
      auto data = io::hat_from_json(io::load_file(file), ctx.element_bound);
      int bv = base.empty() ? 0 : data.y.underlying().vertex_index(base);
      auto ball = assemble_hat_ball(data, radius, bv);
      Json checks = Json::array();
      for (const auto& chk : ball.interior_checks)
        checks.push_back({{"name", chk.clause}, {"ok", chk.ok}, {"witness", chk.witness}});
      ctx.result = {{"nodes", ball.ball.underlying().num_vertices()},
                    {"boundary", (int)ball.boundary.size()},
                    {"interior_ok", ball.interior_ok},
                    {"interior_checks", checks}};
      ctx.dot = to_dot(ball.ball.underlying());
      if (!ball.interior_ok) ctx.exit_code = 2;
      say("ball with " + std::to_string(ball.ball.underlying().num_vertices()) +
          " nodes");
    });
  }

  // global options may appear after subcommand arguments
  std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* a) {
    a->fallthrough();
    for (auto* sub : a->get_subcommands({})) enable_fallthrough(sub);
  };
  enable_fallthrough(&app);

  // parse and run
  std::vector<const char*> argv;
  argv.push_back("serre");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse((int)argv.size(), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const error& e) {
    err << e.what() << "\n";
    ctx.result = {{"error", e.what()}};
    if (e.code() == errc::no_common_cover ||
        e.code() == errc::ambiguous_local_symmetry ||
        e.code() == errc::gluing_mismatch) {
      ctx.exit_code = 2;
      emit(ctx);
      return 2;
    }
    emit(ctx);
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  emit(ctx);
  return ctx.exit_code;
}

}  // namespace serre::cli
