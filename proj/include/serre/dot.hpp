#pragma once
// DOT emission: dart orientation as directed edge pairs, metadata as colors.
// Visualization only, never parsed back.

#include <map>
#include <string>

#include "serre/core.hpp"

namespace serre {

inline std::string to_dot(const SerreGraph& g,
                          const std::map<int, std::string>& vertex_color = {},
                          const std::map<int, std::string>& dart_color = {}) {
  std::string out = "digraph serre {\n";
  for (int v = 0; v < g.num_vertices(); ++v) {
    out += "  \"" + g.vertex_id(v) + "\"";
    auto it = vertex_color.find(v);
    if (it != vertex_color.end())
      out += " [style=filled, fillcolor=\"" + it->second + "\"]";
    out += ";\n";
  }
  for (int d = 0; d < g.num_darts(); ++d) {
    out += "  \"" + g.vertex_id(g.iota(d)) + "\" -> \"" + g.vertex_id(g.tau(d)) +
           "\" [label=\"" + g.dart_id(d) + "\"";
    auto it = dart_color.find(d);
    if (it != dart_color.end()) out += ", color=\"" + it->second + "\"";
    out += "];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace serre
