#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

// Exhaustive s/t minimum cut over every source/sink split of a small graph.

namespace oracle {

template <typename Cap>
struct SmallGraph {
  struct Edge {
    int u, v;
    Cap cap, rev;
  };
  int n = 0;
  std::vector<Cap> src, sink;
  std::vector<Edge> edges;

  // Bit i of `source_set` set: node i on the source side.
  Cap cut_cost(std::uint32_t source_set) const {
    Cap c = 0;
    for (int i = 0; i < n; ++i) c += (source_set >> i & 1u) ? sink[i] : src[i];
    for (const Edge& e : edges) {
      const bool su = source_set >> e.u & 1u, sv = source_set >> e.v & 1u;
      if (su && !sv) c += e.cap;
      if (sv && !su) c += e.rev;
    }
    return c;
  }

  Cap brute_force_min_cut() const {
    Cap best = std::numeric_limits<Cap>::max();
    for (std::uint32_t s = 0; s < (1u << n); ++s) best = std::min(best, cut_cost(s));
    return best;
  }
};

// Integer capacities in [0, 10]; dense enough to have interesting cuts.
inline SmallGraph<std::int64_t> random_int_graph(std::mt19937_64& rng, int max_nodes = 10) {
  SmallGraph<std::int64_t> g;
  g.n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes));
  std::uniform_int_distribution<std::int64_t> cap(0, 10);
  for (int i = 0; i < g.n; ++i) {
    g.src.push_back(rng() % 3 == 0 ? 0 : cap(rng));
    g.sink.push_back(rng() % 3 == 0 ? 0 : cap(rng));
  }
  for (int u = 0; u < g.n; ++u)
    for (int v = u + 1; v < g.n; ++v)
      if (rng() % 2 == 0) g.edges.push_back({u, v, cap(rng), cap(rng)});
  return g;
}

}  // namespace oracle
