#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "patternham/graph.hpp"

namespace patternham {

/// One full run of the randomly r-colored (di)graph process.
struct ColoredProcess {
  std::size_t n = 0;
  int r = 1;
  bool directed = false;
  std::uint64_t seed = 0;
  std::vector<ColoredEdge> edges;

  Step length() const noexcept { return edges.size(); }
  static Step full_length(std::size_t n, bool directed) noexcept {
    return directed ? static_cast<Step>(n) * (n - 1) : static_cast<Step>(n) * (n - 1) / 2;
  }
  bool operator==(const ColoredProcess&) const = default;
};

/// Largest n accepted by `generate` (about 2 * 10^8 stored steps).
inline constexpr std::size_t kMaxProcessVertices = 20000;

/// Fisher-Yates over the full pair list, one Xoshiro256 stream seeded by `seed`.
/// Step k (forward, k = 0..N-1) draws in order: the swap index j in [k, N),
/// the color 1 + bounded(r), and for undirected processes the orientation bit.
/// Pairs are enumerated a < b (undirected) or row-major a != b (directed).
ColoredProcess generate(std::size_t n, int r, std::uint64_t seed, bool directed);

ColoredGraph snapshot(const ColoredProcess& proc, Step t);
/// Adds steps g.edge_count()+1 .. t to a snapshot built from the same process.
void advance(ColoredGraph& g, const ColoredProcess& proc, Step t);

void write_process(const ColoredProcess& proc, std::ostream& out);
ColoredProcess parse_process(std::istream& in);
void write_process_file(const ColoredProcess& proc, const std::filesystem::path& path);
ColoredProcess read_process_file(const std::filesystem::path& path);

}  // namespace patternham
