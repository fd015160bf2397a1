#pragma once

#include <optional>
#include <span>
#include <vector>

#include "patternham/common.hpp"
#include "patternham/pattern.hpp"

namespace patternham {

/// One process step. For undirected processes (tail, head) is the random orientation
/// drawn with the edge; for directed processes it is the arc.
struct ColoredEdge {
  Vertex tail = 0;
  Vertex head = 0;
  Color color = 0;
  bool operator==(const ColoredEdge&) const = default;
};

struct Incidence {
  Vertex other;
  Color color;
  bool outgoing;  // this vertex is the tail
  Step step;      // 1-based process index of the edge
};

/// A prefix snapshot G_t^r: adjacency plus per-vertex, per-color incidence tables.
class ColoredGraph {
 public:
  ColoredGraph(std::size_t n, int palette, bool directed);

  void add_edge(const ColoredEdge& e, Step step);

  std::size_t vertex_count() const noexcept { return n_; }
  int palette() const noexcept { return r_; }
  bool directed() const noexcept { return directed_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const Incidence> incident(Vertex v) const noexcept { return adj_[v]; }
  std::uint32_t degree(Vertex v) const noexcept { return static_cast<std::uint32_t>(adj_[v].size()); }
  std::uint32_t in_degree(Vertex v) const noexcept { return in_deg_[v]; }
  std::uint32_t out_degree(Vertex v) const noexcept { return out_deg_[v]; }

  /// deg(v, c): all incident edges of color c (directed graphs count both directions).
  std::uint32_t count(Vertex v, Color c) const noexcept { return total_[slot(v, c)]; }
  std::uint32_t in_count(Vertex v, Color c) const noexcept { return in_[slot(v, c)]; }
  std::uint32_t out_count(Vertex v, Color c) const noexcept { return out_[slot(v, c)]; }
  std::span<const std::uint32_t> counts(Vertex v) const noexcept { return row(total_, v); }
  std::span<const std::uint32_t> in_counts(Vertex v) const noexcept { return row(in_, v); }
  std::span<const std::uint32_t> out_counts(Vertex v) const noexcept { return row(out_, v); }

  /// Color of edge {u, v} (undirected) or of arc u -> v (directed).
  std::optional<Color> edge_color(Vertex u, Vertex v) const noexcept;
  bool traversable(Vertex u, Vertex v, Color c) const noexcept;

  /// Stored edges in process order, with their 1-based steps.
  const std::vector<ColoredEdge>& edges() const noexcept { return edges_; }
  const std::vector<Step>& steps() const noexcept { return steps_; }

  bool fits_at(Vertex v, const Pattern& p) const noexcept;
  std::uint32_t min_degree() const noexcept;  // directed: min over in- and out-degree

 private:
  std::size_t slot(Vertex v, Color c) const noexcept { return static_cast<std::size_t>(v) * (r_ + 1) + c; }
  std::span<const std::uint32_t> row(const std::vector<std::uint32_t>& t, Vertex v) const noexcept {
    return {t.data() + slot(v, 0), static_cast<std::size_t>(r_) + 1};
  }

  std::size_t n_;
  int r_;
  bool directed_;
  std::vector<std::vector<Incidence>> adj_;
  std::vector<std::uint32_t> total_, in_, out_;
  std::vector<std::uint32_t> in_deg_, out_deg_;
  std::vector<ColoredEdge> edges_;
  std::vector<Step> steps_;
};

/// G_t^r(C): the edges whose color lies in `colors`; vertex set unchanged.
ColoredGraph color_subgraph(const ColoredGraph& g, std::span<const Color> colors);

/// Traversal adjacency grouped by color: neighbors(u, c) lists every v such that an
/// edge of color c may be walked from u to v (both ways when undirected). Targets are
/// sorted by vertex id within each color bucket.
class ColorCsr {
 public:
  enum class Direction { Forward, Backward };
  ColorCsr(const ColoredGraph& g, Direction dir = Direction::Forward);

  std::span<const Vertex> neighbors(Vertex u, Color c) const noexcept {
    const std::size_t s = static_cast<std::size_t>(u) * (r_ + 1) + c;
    return {target_.data() + start_[s], start_[s + 1] - start_[s]};
  }
  std::span<const Vertex> all(Vertex u) const noexcept {
    const std::size_t s = static_cast<std::size_t>(u) * (r_ + 1);
    return {target_.data() + start_[s], start_[s + r_ + 1] - start_[s]};
  }
  std::span<const Color> all_colors(Vertex u) const noexcept {
    const std::size_t s = static_cast<std::size_t>(u) * (r_ + 1);
    return {color_.data() + start_[s], start_[s + r_ + 1] - start_[s]};
  }
  std::size_t vertex_count() const noexcept { return n_; }
  int palette() const noexcept { return r_; }

 private:
  std::size_t n_;
  int r_;
  std::vector<std::uint32_t> start_;
  std::vector<Vertex> target_;
  std::vector<Color> color_;
};

}  // namespace patternham
