#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "serre/cli.hpp"

using namespace serre;

namespace {

const std::string samples = SERRE_SAMPLE_DIR;

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmpfile(const std::string& name) {
  return std::string("/tmp/serre_cli_test_") + name;
}

}  // namespace

TEST_CASE("graph validate accepts the loop graph") {
  CHECK(run({"graph", "validate", samples + "/loop.json"}) == 0);
}

TEST_CASE("graph validate rejects malformed input") {
  std::string bad = tmpfile("bad.json");
  std::ofstream(bad) << R"({"kind":"serre-graph","vertices":["v"],)"
                     << R"("darts":[{"id":"e","bar":"e","from":"v","to":"v"}]})";
  std::string text;
  CHECK(run({"graph", "validate", bad}, &text) == 1);
  CHECK(text.find("FixedPointInvolution") != std::string::npos);
}

TEST_CASE("common-cover reports NoCommonCover with exit 2") {
  std::string report = tmpfile("nocover.json");
  std::string text;
  int code = run({"leighton", "common-cover", samples + "/triangle.json",
                  samples + "/star3.json", "--report", report},
                 &text);
  CHECK(code == 2);
  CHECK(text.find("NoCommonCover") != std::string::npos);
}

TEST_CASE("blowup construct --verify reports 18 vertices for the S3 edge input") {
  std::string report = tmpfile("blowup.json");
  CHECK(run({"blowup", "construct", samples + "/blowup-s3-edge.json", "--verify",
             "--report", report}) == 0);
  auto j = io::load_file(report);
  CHECK(j["result"]["cosets"] == 6);
  CHECK(j["result"]["verified"] == true);
  CHECK(j["config"]["element_bound"] == 20000);
}

TEST_CASE("reports are byte-identical across repeated runs") {
  std::string r1 = tmpfile("det1.json"), r2 = tmpfile("det2.json");
  for (auto args : {std::vector<std::string>{"blowup", "construct",
                                             samples + "/blowup-z2-edge.json",
                                             "--verify"},
                    std::vector<std::string>{"leighton", "common-cover",
                                             samples + "/cycle4.json",
                                             samples + "/cycle6.json"},
                    std::vector<std::string>{"aut", "group",
                                             samples + "/decorated4.json"}}) {
    auto with_report = args;
    with_report.push_back("--report");
    with_report.push_back(r1);
    CHECK(run(with_report) == 0);
    with_report.back() = r2;
    CHECK(run(with_report) == 0);
    CHECK(slurp(r1) == slurp(r2));
  }
}

TEST_CASE("round trip: serialize(parse(file)) is semantically identical") {
  for (const std::string name :
       {"loop.json", "triangle.json", "k4.json", "decorated4.json"}) {
    auto g = io::graph_from_json(io::load_file(samples + "/" + name));
    std::string saved = tmpfile("roundtrip.json");
    io::save_file(saved, io::graph_to_json(g));
    auto g2 = io::graph_from_json(io::load_file(saved));
    CHECK(same_graph(g, g2));
  }
}

TEST_CASE("group subcommands") {
  std::string gfile = tmpfile("group.json");
  std::ofstream(gfile) << R"({"kind":"perm-group","domain":["1","2","3","4"],)"
                       << R"("generators":[{"1":"2","2":"3","3":"4","4":"1"}]})";
  std::string report = tmpfile("orbits.json");
  CHECK(run({"group", "orbits", gfile, "--report", report}) == 0);
  auto j = io::load_file(report);
  CHECK(j["result"]["orbits"].size() == 1);

  CHECK(run({"group", "stab", gfile, "--point", "1", "--report", report}) == 0);
  CHECK(io::load_file(report)["result"]["order"] == 1);

  CHECK(run({"group", "blocks", gfile, "--report", report}) == 0);
  auto blocks = io::load_file(report)["result"];
  CHECK(blocks["primitive"] == false);
  CHECK(blocks["systems"].size() == 1);
}

TEST_CASE("aut group and orbit-bound") {
  std::string report = tmpfile("aut.json");
  CHECK(run({"aut", "group", samples + "/k4.json", "--report", report}) == 0);
  CHECK(io::load_file(report)["result"]["order"] == 24);

  // the edge flip has trivial vertex stabilizers, so the bound is 1
  CHECK(run({"aut", "orbit-bound", samples + "/z2-edge-action.json", "--report",
             report}) == 0);
  CHECK(io::load_file(report)["result"]["bound"] == 1);
}

TEST_CASE("graph quotient via a partition file") {
  std::string report = tmpfile("quot.json");
  CHECK(run({"graph", "quotient", samples + "/decorated4.json", "--partition",
             samples + "/leafpairs4.json", "--report", report}) == 0);
  auto j = io::load_file(report);
  CHECK(j["result"]["blocks"] == 8);
  CHECK(j["result"]["vertices"] == 8);
}

TEST_CASE("group kernel through files") {
  std::string report = tmpfile("kernel.json");
  CHECK(run({"group", "kernel", samples + "/z2-edge-action.json", "--report",
             report}) == 0);
  CHECK(io::load_file(report)["result"]["order"] == 1);
}

TEST_CASE("blowup quotient with a subgroup family") {
  std::string report = tmpfile("bq.json");
  CHECK(run({"blowup", "quotient", samples + "/blowup-s3-edge.json", "--family",
             samples + "/family-a3.json", "--report", report}) == 0);
  auto j = io::load_file(report);
  CHECK(j["result"]["vertices"] == 6);
  CHECK(j["result"]["verified"] == true);
}

TEST_CASE("gos subcommands") {
  std::string report = tmpfile("gos.json");
  CHECK(run({"gos", "total", samples + "/gos-base.json", "--report", report}) == 0);
  auto j = io::load_file(report);
  CHECK(j["result"]["connected"] == true);

  CHECK(run({"gos", "check-cover", samples + "/gos-cover2-projection.json",
             "--report", report}) == 0);
  CHECK(io::load_file(report)["result"]["degree"] == 2);

  CHECK(run({"gos", "deck", samples + "/gos-cover2-projection.json", "--report",
             report}) == 0);
  CHECK(io::load_file(report)["result"]["regular"] == true);
}

TEST_CASE("leighton subcommands") {
  std::string report = tmpfile("leighton.json");
  CHECK(run({"leighton", "refine", samples + "/star3.json", "--report", report}) == 0);
  CHECK(io::load_file(report)["result"]["classes"] == 2);

  CHECK(run({"leighton", "oracle", samples + "/cycle4.json", samples + "/cycle6.json",
             "--max-degree", "3", "--report", report}) == 0);
  CHECK(io::load_file(report)["result"]["vertices"] == 12);

  std::string text;
  CHECK(run({"leighton", "oracle", samples + "/triangle.json", samples + "/star3.json"},
            &text) == 2);

  CHECK(run({"leighton", "gos-cover", samples + "/gos-cover2.json",
             samples + "/gos-cover3.json", "--report", report}) == 0);
  CHECK(io::load_file(report)["result"]["underlying_vertices"] == 6);

  CHECK(run({"leighton", "hat", "verify", samples + "/hat-simple6.json", "--report",
             report}) == 0);
  CHECK(io::load_file(report)["result"]["passed"] == true);

  CHECK(run({"leighton", "hat", "ball", samples + "/hat-simple6.json", "--radius",
             "1", "--report", report}) == 0);
  CHECK(io::load_file(report)["result"]["interior_ok"] == true);
}

TEST_CASE("dot output is emitted on request") {
  std::string dot = tmpfile("graph.dot");
  CHECK(run({"graph", "validate", samples + "/triangle.json", "--dot", dot}) == 0);
  auto text = slurp(dot);
  CHECK(text.find("digraph") != std::string::npos);
  CHECK(text.find("->") != std::string::npos);
}

TEST_CASE("the built binary honors the exit code contract") {
  std::string bin = SERRE_CLI_BIN;
  CHECK(std::system((bin + " graph validate " + samples + "/loop.json > /dev/null").c_str()) == 0);
  int rc = std::system((bin + " leighton common-cover " + samples + "/triangle.json " +
                        samples + "/star3.json > /dev/null 2>&1")
                           .c_str());
  CHECK(WEXITSTATUS(rc) == 2);
  rc = std::system((bin + " graph validate /nonexistent.json > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 1);
}

TEST_CASE("usage errors exit with 1") {
  std::string text;
  CHECK(run({"graph", "validate"}, &text) == 1);
  CHECK(run({"no-such-command"}, &text) == 1);
}
