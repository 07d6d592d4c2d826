#pragma once
// Shared builders for the test suites.

#include <random>
#include <string>

#include "serre/core.hpp"

namespace testutil {

using namespace serre;

inline SerreGraph cycle(int n, const std::string& prefix = "c") {
  GraphBuilder b;
  for (int i = 0; i < n; ++i) b.add_vertex(prefix + std::to_string(i));
  for (int i = 0; i < n; ++i)
    b.add_edge(prefix + std::to_string(i), prefix + std::to_string((i + 1) % n),
               prefix + "e" + std::to_string(i));
  return b.build();
}

inline SerreGraph path(int edges, const std::string& prefix = "p") {
  GraphBuilder b;
  for (int i = 0; i <= edges; ++i) b.add_vertex(prefix + std::to_string(i));
  for (int i = 0; i < edges; ++i)
    b.add_edge(prefix + std::to_string(i), prefix + std::to_string(i + 1),
               prefix + "e" + std::to_string(i));
  return b.build();
}

// Star with `leaves` leaves around a center.
inline SerreGraph star(int leaves, const std::string& prefix = "s") {
  GraphBuilder b;
  b.add_vertex(prefix + "c");
  for (int i = 0; i < leaves; ++i) {
    b.add_vertex(prefix + std::to_string(i));
    b.add_edge(prefix + "c", prefix + std::to_string(i),
               prefix + "e" + std::to_string(i));
  }
  return b.build();
}

inline SerreGraph complete(int n, const std::string& prefix = "k") {
  GraphBuilder b;
  for (int i = 0; i < n; ++i) b.add_vertex(prefix + std::to_string(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      b.add_edge(prefix + std::to_string(i), prefix + std::to_string(j),
                 prefix + "e" + std::to_string(i) + "_" + std::to_string(j));
  return b.build();
}

inline SerreGraph complete_bipartite(int m, int n) {
  GraphBuilder b;
  for (int i = 0; i < m; ++i) b.add_vertex("a" + std::to_string(i));
  for (int j = 0; j < n; ++j) b.add_vertex("b" + std::to_string(j));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      b.add_edge("a" + std::to_string(i), "b" + std::to_string(j),
                 "e" + std::to_string(i) + "_" + std::to_string(j));
  return b.build();
}

// Two vertices joined by k parallel edges (k = 3 gives the theta graph).
inline SerreGraph banana(int k) {
  GraphBuilder b;
  b.add_vertex("u");
  b.add_vertex("v");
  for (int i = 0; i < k; ++i)
    b.add_edge("u", "v", "e" + std::to_string(i));
  return b.build();
}

inline SerreGraph loop_graph() {
  GraphBuilder b;
  b.add_vertex("v");
  b.add_edge("v", "v", "e", "eb");
  return b.build();
}

inline SerreGraph wedge_of_loops(int k) {
  GraphBuilder b;
  b.add_vertex("v");
  for (int i = 0; i < k; ++i)
    b.add_edge("v", "v", "l" + std::to_string(i));
  return b.build();
}

// n-cycle with a pair of leaves attached at every cycle vertex.
inline SerreGraph decorated_cycle(int n) {
  GraphBuilder b;
  for (int i = 0; i < n; ++i) {
    b.add_vertex("c" + std::to_string(i));
    b.add_vertex("x" + std::to_string(i));
    b.add_vertex("y" + std::to_string(i));
  }
  for (int i = 0; i < n; ++i) {
    b.add_edge("c" + std::to_string(i), "c" + std::to_string((i + 1) % n),
               "e" + std::to_string(i));
    b.add_edge("c" + std::to_string(i), "x" + std::to_string(i),
               "fx" + std::to_string(i));
    b.add_edge("c" + std::to_string(i), "y" + std::to_string(i),
               "fy" + std::to_string(i));
  }
  return b.build();
}

// Connected random graph: a spanning tree plus `extra` random edges.
inline SerreGraph random_connected(std::mt19937& rng, int n, int extra,
                                   bool allow_loop = false) {
  GraphBuilder b;
  for (int i = 0; i < n; ++i) b.add_vertex("r" + std::to_string(i));
  int eid = 0;
  for (int i = 1; i < n; ++i) {
    int p = (int)(rng() % i);
    b.add_edge("r" + std::to_string(p), "r" + std::to_string(i),
               "re" + std::to_string(eid++));
  }
  for (int k = 0; k < extra; ++k) {
    int u = (int)(rng() % n), v = (int)(rng() % n);
    if (u == v && !allow_loop) v = (v + 1) % n;
    b.add_edge("r" + std::to_string(u), "r" + std::to_string(v),
               "re" + std::to_string(eid++));
  }
  return b.build();
}

}  // namespace testutil
