#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.
// Nothing here calls into verify, hamilton or the demand code it is checking.

#include <algorithm>
#include <bit>
#include <functional>
#include <vector>

#include "patternham/pattern.hpp"
#include "patternham/process.hpp"
#include "patternham/rng.hpp"

namespace testkit {

using namespace patternham;

// n=4, r=2: 1-2 (1), 2-3 (2), 3-4 (1), 4-1 (2), then 1-3 (1), 2-4 (2).
inline ColoredProcess crafted4() {
  ColoredProcess p;
  p.n = 4;
  p.r = 2;
  p.seed = 0;
  p.edges = {{0, 1, 1}, {1, 2, 2}, {2, 3, 1}, {3, 0, 2}, {0, 2, 1}, {1, 3, 2}};
  return p;
}

/// Builds a graph straight from an edge list (1-based vertices as written).
inline ColoredGraph make_graph(std::size_t n, int r, bool directed,
                               std::initializer_list<std::array<int, 3>> edges) {
  ColoredGraph g(n, r, directed);
  Step s = 0;
  for (auto [a, b, c] : edges) {
    g.add_edge({static_cast<Vertex>(a - 1), static_cast<Vertex>(b - 1), static_cast<Color>(c)}, ++s);
  }
  return g;
}

/// A random prefix of a random process: density in (0, 1].
inline ColoredGraph random_graph(std::size_t n, int r, bool directed, double density, std::uint64_t seed) {
  auto proc = generate(n, r, seed, directed);
  Step t = static_cast<Step>(density * static_cast<double>(proc.length()) + 0.5);
  return snapshot(proc, std::min<Step>(t, proc.length()));
}

inline Pattern random_pattern(Xoshiro256& g, std::size_t max_len, int max_r) {
  while (true) {
    const std::size_t ell = 1 + bounded(g, max_len);
    const int r = 1 + static_cast<int>(bounded(g, std::min<std::size_t>(max_r, ell)));
    std::vector<Color> c(ell);
    for (auto& x : c) x = static_cast<Color>(1 + bounded(g, r));
    std::vector<bool> seen(r + 1, false);
    for (auto x : c) seen[x] = true;
    if (std::count(seen.begin() + 1, seen.end(), true) == r) return Pattern(c, r);
  }
}

/// Dense color matrix, 0 = no edge. Directed graphs store arcs only one way.
inline std::vector<int> color_matrix(const ColoredGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<int> m(n * n, 0);
  for (const auto& e : g.edges()) {
    m[e.tail * n + e.head] = e.color;
    if (!g.directed()) m[e.head * n + e.tail] = e.color;
  }
  return m;
}

inline bool oracle_offset_exists(const std::vector<int>& colors, const std::vector<Color>& pat) {
  for (std::size_t l = 0; l < pat.size(); ++l) {
    bool ok = true;
    for (std::size_t j = 0; j < colors.size() && ok; ++j) ok = colors[j] == pat[(j + l) % pat.size()];
    if (ok) return true;
  }
  return false;
}

/// reach[u*n+v]: a simple path u -> v whose color sequence is Pi-colored, found by
/// enumerating every simple path from u.
inline std::vector<bool> oracle_simple_reach(const ColoredGraph& g, const Pattern& p) {
  const std::size_t n = g.vertex_count();
  const auto m = color_matrix(g);
  std::vector<bool> reach(n * n, false);
  std::vector<bool> on(n, false);
  std::vector<int> colors;
  std::function<void(Vertex, Vertex)> dfs = [&](Vertex u, Vertex x) {
    if (oracle_offset_exists(colors, p.colors())) reach[u * n + x] = true;
    for (Vertex y = 0; y < n; ++y) {
      if (on[y] || m[x * n + y] == 0) continue;
      on[y] = true;
      colors.push_back(m[x * n + y]);
      dfs(u, y);
      colors.pop_back();
      on[y] = false;
    }
  };
  for (Vertex u = 0; u < n; ++u) {
    on[u] = true;
    dfs(u, u);
    on[u] = false;
  }
  return reach;
}

inline bool oracle_pi_connected(const ColoredGraph& g, const Pattern& p) {
  const std::size_t n = g.vertex_count();
  const auto reach = oracle_simple_reach(g, p);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = 0; v < n; ++v) {
      if (u == v) continue;
      const bool ok = g.directed() ? reach[u * n + v] : (reach[u * n + v] || reach[v * n + u]);
      if (!ok) return false;
    }
  }
  return true;
}

/// Demand by label subsets: the smallest A of labels such that the positions whose
/// label lies in A hit every required pair. Undirected labels are colors.
inline int oracle_demand(const Pattern& p) {
  const int r = p.palette();
  const auto& c = p.colors();
  const std::size_t ell = c.size();
  int best = r + 1;
  for (std::uint32_t a = 0; a < (1u << r); ++a) {
    bool ok = true;
    for (std::size_t i = 0; i < ell && ok; ++i) {
      ok = (a >> (c[i] - 1) & 1) || (a >> (c[(i + 1) % ell] - 1) & 1);
    }
    if (ok) best = std::min(best, std::popcount(a));
  }
  return best;
}

/// Directed labels: bit c-1 is (c, out), bit r+c-1 is (c, in). The pair for position
/// i is {(i,+), (i+1,-)}, labelled (Pi_i, out) and (Pi_i, in).
inline int oracle_directed_demand(const Pattern& p) {
  const int r = p.palette();
  const auto& c = p.colors();
  int best = 2 * r + 1;
  for (std::uint32_t a = 0; a < (1u << (2 * r)); ++a) {
    bool ok = true;
    for (std::size_t i = 0; i < c.size() && ok; ++i) {
      const Color pi = c[i];
      ok = (a >> (pi - 1) & 1) || (a >> (r + pi - 1) & 1);
    }
    if (ok) best = std::min(best, std::popcount(a));
  }
  return best;
}

}  // namespace testkit
