#include "patternham/pattern.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <limits>

namespace patternham {

Pattern::Pattern(std::vector<Color> colors, int palette) : colors_(std::move(colors)), palette_(palette) {
  if (colors_.empty()) throw std::invalid_argument("pattern must be non-empty");
  if (palette_ < 1) throw std::invalid_argument("palette size must be positive");
  std::vector<bool> seen(palette_ + 1, false);
  for (Color c : colors_) {
    if (c < 1 || c > palette_) {
      throw std::invalid_argument("pattern color " + std::to_string(c) + " outside [1, " +
                                  std::to_string(palette_) + "]");
    }
    seen[c] = true;
  }
  for (int c = 1; c <= palette_; ++c) {
    if (!seen[c]) throw std::invalid_argument("color " + std::to_string(c) + " does not occur in the pattern");
  }
  const std::size_t ell = colors_.size();
  for (std::size_t j = 0; j < ell; ++j) {
    Color a = colors_[j];
    Color b = colors_[(j + 1) % ell];
    ordered_.emplace_back(a, b);
    pairs_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  std::sort(ordered_.begin(), ordered_.end());
  ordered_.erase(std::unique(ordered_.begin(), ordered_.end()), ordered_.end());
}

Pattern Pattern::parse(std::string_view text, int palette) {
  std::vector<Color> colors;
  std::size_t pos = 0;
  while (true) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc() || value == 0 || value > std::numeric_limits<Color>::max()) {
      throw std::invalid_argument("pattern: expected a positive color at position " + std::to_string(pos + 1) +
                                  " in \"" + std::string(text) + "\"");
    }
    colors.push_back(static_cast<Color>(value));
    pos = static_cast<std::size_t>(ptr - text.data());
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (pos == text.size()) break;
    if (text[pos] != ',') {
      throw std::invalid_argument("pattern: unexpected '" + std::string(1, text[pos]) + "' at position " +
                                  std::to_string(pos + 1));
    }
    ++pos;
  }
  if (palette == 0) palette = *std::max_element(colors.begin(), colors.end());
  return Pattern(std::move(colors), palette);
}

std::string Pattern::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < colors_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(colors_[i]);
  }
  return out;
}

namespace {

// Minimum distinct-label subset of a ground set, given a cover predicate and the label
// id of each element. Ties: fewer labels, then fewer elements, then the larger mask.
struct CoverSearch {
  std::uint64_t best_mask = 0;
  int best_labels = std::numeric_limits<int>::max();
  int best_size = std::numeric_limits<int>::max();
  std::uint64_t covers = 0;
};

template <typename IsCover>
CoverSearch min_label_cover(std::size_t ground, const std::vector<int>& label_of, IsCover is_cover) {
  CoverSearch s;
  const std::uint64_t total = std::uint64_t{1} << ground;
  const bool table = ground <= 20;
  std::vector<std::uint64_t> labels;
  if (table) labels.assign(total, 0);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::uint64_t lab = 0;
    if (table) {
      if (mask) {
        lab = labels[mask & (mask - 1)] | (std::uint64_t{1} << label_of[std::countr_zero(mask)]);
        labels[mask] = lab;
      }
    } else {
      for (std::uint64_t m = mask; m; m &= m - 1) lab |= std::uint64_t{1} << label_of[std::countr_zero(m)];
    }
    if (!is_cover(mask)) continue;
    ++s.covers;
    int nl = std::popcount(lab);
    int sz = std::popcount(mask);
    if (nl < s.best_labels || (nl == s.best_labels && sz <= s.best_size)) {
      s.best_labels = nl;
      s.best_size = sz;
      s.best_mask = mask;
    }
  }
  return s;
}

}  // namespace

bool is_position_cover(const Pattern& p, std::span<const std::size_t> positions) {
  const std::size_t ell = p.length();
  std::vector<bool> in(ell + 1, false);
  for (std::size_t s : positions) {
    if (s >= 1 && s <= ell) in[s] = true;
  }
  for (std::size_t i = 1; i <= ell; ++i) {
    if (!in[i] && !in[cyclic_index(i + 1, ell)]) return false;
  }
  return true;
}

DemandResult demand(const Pattern& p, std::size_t cap) {
  const std::size_t ell = p.length();
  if (ell > cap) {
    throw CapacityError("demand enumeration is capped at length " + std::to_string(cap) + ", pattern has " +
                        std::to_string(ell));
  }
  std::vector<int> label_of(ell);
  for (std::size_t i = 0; i < ell; ++i) label_of[i] = p.colors()[i] - 1;
  const std::uint64_t full = (std::uint64_t{1} << ell) - 1;
  auto cover = [&](std::uint64_t mask) {
    // bit i of `next` is bit (i+1) mod ell of mask
    std::uint64_t next = (mask >> 1) | ((mask & 1) << (ell - 1));
    return (mask | next) == full;
  };
  CoverSearch s = min_label_cover(ell, label_of, cover);

  DemandResult out;
  out.demand = s.best_labels;
  out.cover_count = s.covers;
  for (std::size_t i = 0; i < ell; ++i) {
    if (s.best_mask >> i & 1) {
      out.witness.push_back(i + 1);
      out.label_set.push_back(p.colors()[i]);
    }
  }
  std::sort(out.label_set.begin(), out.label_set.end());
  out.label_set.erase(std::unique(out.label_set.begin(), out.label_set.end()), out.label_set.end());
  return out;
}

DemandResult directed_demand(const Pattern& p, std::size_t cap) {
  const std::size_t ell = p.length();
  if (2 * ell > cap) {
    throw CapacityError("directed demand enumeration is capped at " + std::to_string(cap) +
                        " ground elements, pattern needs " + std::to_string(2 * ell));
  }
  const int r = p.palette();
  // element i < ell is (i+1, +) with label (Pi_{i+1}, out);
  // element ell + i is (i+1, -) with label (Pi_i, in), Pi_0 = Pi_ell.
  std::vector<int> label_of(2 * ell);
  for (std::size_t i = 0; i < ell; ++i) {
    label_of[i] = p.colors()[i] - 1;
    label_of[ell + i] = r + p.colors()[(i + ell - 1) % ell] - 1;
  }
  const std::uint64_t full = (std::uint64_t{1} << ell) - 1;
  auto cover = [&](std::uint64_t mask) {
    std::uint64_t plus = mask & full;
    std::uint64_t minus = mask >> ell;
    std::uint64_t minus_next = (minus >> 1) | ((minus & 1) << (ell - 1));
    return (plus | minus_next) == full;
  };
  CoverSearch s = min_label_cover(2 * ell, label_of, cover);

  DemandResult out;
  out.demand = s.best_labels;
  out.cover_count = s.covers;
  for (std::size_t e = 0; e < 2 * ell; ++e) {
    if (!(s.best_mask >> e & 1)) continue;
    if (e < ell) {
      out.directed_witness.emplace_back(e + 1, Sign::Out);
      out.directed_label_set.push_back({p.colors()[e], Sign::Out});
    } else {
      std::size_t i = e - ell;
      out.directed_witness.emplace_back(i + 1, Sign::In);
      out.directed_label_set.push_back({p.colors()[(i + ell - 1) % ell], Sign::In});
    }
  }
  auto key = [](const DirectedPatternLabel& l) { return std::pair{l.sign == Sign::In, l.color}; };
  std::sort(out.directed_label_set.begin(), out.directed_label_set.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  out.directed_label_set.erase(std::unique(out.directed_label_set.begin(), out.directed_label_set.end()),
                               out.directed_label_set.end());
  return out;
}

bool fits(std::span<const std::uint32_t> counts, const Pattern& p) noexcept {
  for (auto [a, b] : p.adjacent_pairs()) {
    if (a >= counts.size() || b >= counts.size()) continue;
    if (a == b) {
      if (counts[a] >= 2) return true;
    } else if (counts[a] >= 1 && counts[b] >= 1) {
      return true;
    }
  }
  return false;
}

bool fits_directed(std::span<const std::uint32_t> in_counts, std::span<const std::uint32_t> out_counts,
                   const Pattern& p) noexcept {
  for (auto [a, b] : p.ordered_pairs()) {
    if (a >= in_counts.size() || b >= out_counts.size()) continue;
    if (in_counts[a] >= 1 && out_counts[b] >= 1) return true;
  }
  return false;
}

}  // namespace patternham
