#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patternham/common.hpp"

namespace patternham {

/// 1-based cyclic position: s maps to ((s - 1) mod ell) + 1, so s = ell maps to ell.
constexpr std::size_t cyclic_index(std::size_t s, std::size_t ell) noexcept {
  return ((s - 1) % ell) + 1;
}

/// A color string over [r] read cyclically. Every color of the palette must occur.
class Pattern {
 public:
  Pattern(std::vector<Color> colors, int palette);

  /// Parses "1,2,2,3". A palette of 0 means "the largest color in the string".
  static Pattern parse(std::string_view text, int palette = 0);

  std::size_t length() const noexcept { return colors_.size(); }
  int palette() const noexcept { return palette_; }
  const std::vector<Color>& colors() const noexcept { return colors_; }

  /// Pi_s with 1-based cyclic indexing (s >= 1).
  Color at(std::size_t s) const noexcept { return colors_[cyclic_index(s, length()) - 1]; }
  /// Pattern color for 0-based phase k (k may exceed ell).
  Color phase(std::size_t k) const noexcept { return colors_[k % colors_.size()]; }

  /// Unordered color pairs {Pi_j, Pi_{j+1}} for j in [ell], deduplicated.
  const std::vector<std::pair<Color, Color>>& adjacent_pairs() const noexcept { return pairs_; }
  /// Ordered (in-color, out-color) pairs (Pi_j, Pi_{j+1}) used by the directed fit test.
  const std::vector<std::pair<Color, Color>>& ordered_pairs() const noexcept { return ordered_; }

  std::string to_string() const;
  bool operator==(const Pattern& other) const noexcept {
    return palette_ == other.palette_ && colors_ == other.colors_;
  }

 private:
  std::vector<Color> colors_;
  int palette_;
  std::vector<std::pair<Color, Color>> pairs_;
  std::vector<std::pair<Color, Color>> ordered_;
};

enum class Sign : std::uint8_t { In, Out };

struct DirectedPatternLabel {
  Color color;
  Sign sign;
  bool operator==(const DirectedPatternLabel&) const = default;
};

/// Minimum-label cover of the position cycle. Positions are 1-based; for the directed
/// variant each witness element is (position, sign) with Out for "+" and In for "-".
struct DemandResult {
  int demand = 0;
  std::vector<std::size_t> witness;                            // undirected positions
  std::vector<std::pair<std::size_t, Sign>> directed_witness;  // directed elements
  std::vector<Color> label_set;                                // undirected labels
  std::vector<DirectedPatternLabel> directed_label_set;
  std::uint64_t cover_count = 0;  // |D(Pi)|, the number of covering subsets
};

inline constexpr std::size_t kDemandEnumerationCap = 24;

DemandResult demand(const Pattern& p, std::size_t cap = kDemandEnumerationCap);
DemandResult directed_demand(const Pattern& p, std::size_t cap = kDemandEnumerationCap);

/// True when S (1-based positions) hits every cyclically adjacent pair {i, i+1}.
bool is_position_cover(const Pattern& p, std::span<const std::size_t> positions);

/// Per-color incidence at one vertex, indexed by color value (size palette + 1).
/// Undirected graphs use `total`; directed graphs use `in` (arcs whose head is the
/// vertex) and `out` (arcs whose tail is the vertex).
struct IncidenceCounts {
  std::vector<std::uint32_t> total;
  std::vector<std::uint32_t> in;
  std::vector<std::uint32_t> out;

  static IncidenceCounts undirected(int palette) {
    return {std::vector<std::uint32_t>(palette + 1, 0), {}, {}};
  }
  static IncidenceCounts directed(int palette) {
    return {{}, std::vector<std::uint32_t>(palette + 1, 0), std::vector<std::uint32_t>(palette + 1, 0)};
  }
};

/// v fits Pi when two distinct incident edges carry colors Pi_j, Pi_{j+1} for some j.
bool fits(std::span<const std::uint32_t> counts, const Pattern& p) noexcept;
/// Directed fit: an in-arc colored Pi_i and an out-arc colored Pi_{i+1}.
bool fits_directed(std::span<const std::uint32_t> in_counts, std::span<const std::uint32_t> out_counts,
                   const Pattern& p) noexcept;

inline bool fits(const IncidenceCounts& c, const Pattern& p) noexcept { return fits(c.total, p); }
inline bool fits_directed(const IncidenceCounts& c, const Pattern& p) noexcept {
  return fits_directed(c.in, c.out, p);
}

}  // namespace patternham
