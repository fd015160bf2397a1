#pragma once

#include <optional>
#include <vector>

#include "patternham/graph.hpp"
#include "patternham/pattern.hpp"

namespace patternham {

struct SearchBudget {
  std::uint64_t max_nodes = 10'000'000;
};

enum class SearchStatus { Found, NotFound, Exhausted };

/// NotFound is a proof of absence; Exhausted carries no verdict.
struct SearchResult {
  SearchStatus status = SearchStatus::NotFound;
  std::vector<Vertex> cycle;
  std::uint64_t nodes = 0;
};

const char* to_string(SearchStatus s) noexcept;

/// Exact backtracking search for a Pi-colored Hamilton cycle. Handles both
/// orientations (directed graphs follow arc directions). Requires ell | n and ell <= 64.
///
/// Branches on edges (force or delete) and propagates to a fixpoint after each
/// decision. Each vertex keeps the set of pattern phases it could occupy; an edge is
/// deleted once no phase pair at its endpoints can use it, forced once every local
/// choice uses it, and deleted when it would close a forced chain into a short cycle.
/// A node is also abandoned when the alive graph loses 2-connectivity (strong
/// connectivity when directed) or the phase classes cannot all reach size n / ell.
/// The budget counts branching nodes.
SearchResult find_pi_hamilton(const ColoredGraph& g, const Pattern& p, SearchBudget budget = {});
SearchResult find_pi_hamilton_directed(const ColoredGraph& g, const Pattern& p, SearchBudget budget = {});

inline constexpr std::size_t kBruteForceMaxVertices = 12;

/// Exhaustive oracle over all cyclic orders with vertex 0 first. Shares no code with
/// the finder or with verify. Rejects n > 12.
std::optional<std::vector<Vertex>> brute_force_pi_hamilton(const ColoredGraph& g, const Pattern& p);

}  // namespace patternham
