#pragma once

#include <cstdint>
#include <vector>

namespace patternham {

/// Bipartite graph with left vertices 0..left-1 and right vertices 0..right-1.
class BipartiteGraph {
 public:
  BipartiteGraph(std::size_t left, std::size_t right) : adj_(left), right_(right) {}

  void add_edge(std::uint32_t l, std::uint32_t r);
  std::size_t left_size() const noexcept { return adj_.size(); }
  std::size_t right_size() const noexcept { return right_; }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t l) const noexcept { return adj_[l]; }

 private:
  std::vector<std::vector<std::uint32_t>> adj_;
  std::size_t right_;
};

inline constexpr std::uint32_t kUnmatched = 0xFFFFFFFFu;

struct Matching {
  std::vector<std::uint32_t> left_mate;   // right partner or kUnmatched
  std::vector<std::uint32_t> right_mate;  // left partner or kUnmatched
  std::size_t size = 0;
};

/// Maximum matching by Hopcroft-Karp. Neighbors are tried in insertion order, so the
/// result is a function of the edge order.
Matching hopcroft_karp(const BipartiteGraph& g);

/// When the matching leaves some left vertex free: the left vertices reachable from
/// free left vertices by alternating paths. Their neighborhood is the matched
/// partners only, so |N(A)| < |A| (a Hall violator). Empty when the left side is saturated.
std::vector<std::uint32_t> hall_violator(const BipartiteGraph& g, const Matching& m);

}  // namespace patternham
