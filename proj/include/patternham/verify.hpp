#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patternham/graph.hpp"
#include "patternham/pattern.hpp"

namespace patternham {

/// Boolean outcome with a human-readable reason attached to failures.
struct Verdict {
  bool ok = true;
  std::string reason;
  explicit operator bool() const noexcept { return ok; }
  static Verdict fail(std::string why) { return {false, std::move(why)}; }
};

/// Smallest l in [0, ell) with colors[j] = Pi_{j+1+l} (1-based j), if any.
/// The empty sequence is Pi-colored with l = 0.
std::optional<std::size_t> pi_path_offset(std::span<const Color> colors, const Pattern& p);

/// Colors read once around a closed cycle. True iff ell | k and some start and
/// direction reads as a Pi-colored sequence.
bool is_pi_cycle(std::span<const Color> colors, const Pattern& p);

/// Spanning, edge-respecting, Pi-colored. Directed graphs fix the traversal direction.
Verdict verify_pi_hamilton(const ColoredGraph& g, const Pattern& p, std::span<const Vertex> cycle);

/// Per starting offset l, the vertices reachable from `source` by a Pi-colored *walk*
/// (product-graph BFS). Walk reachability is an upper bound on simple-path
/// reachability; the connectivity predicates below refine it to exact answers.
std::vector<std::vector<bool>> pi_reachability(const ColoredGraph& g, const Pattern& p, Vertex source);

struct PiPath {
  std::vector<Vertex> vertices;
  std::vector<Color> colors;
  std::size_t offset = 0;
};

/// A simple Pi-colored path from u to v (u = v gives the empty path).
std::optional<PiPath> extract_pi_path(const ColoredGraph& g, const Pattern& p, Vertex u, Vertex v);

enum class Execution { Serial, Parallel };

/// Every pair joined by a simple Pi-colored path. Undirected graphs accept a pair
/// {u, v} when the path can be enumerated from either end.
bool is_pi_connected(const ColoredGraph& g, const Pattern& p, Execution ex = Execution::Parallel);
/// Every ordered pair (u, v) joined by a directed simple Pi-colored path.
bool is_pi_strongly_connected(const ColoredGraph& g, const Pattern& p, Execution ex = Execution::Parallel);

/// Dispatches on g.directed().
inline bool pi_connected(const ColoredGraph& g, const Pattern& p, Execution ex = Execution::Parallel) {
  return g.directed() ? is_pi_strongly_connected(g, p, ex) : is_pi_connected(g, p, ex);
}

}  // namespace patternham
