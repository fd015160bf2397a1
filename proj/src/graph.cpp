#include "patternham/graph.hpp"

#include <algorithm>

namespace patternham {

ColoredGraph::ColoredGraph(std::size_t n, int palette, bool directed)
    : n_(n),
      r_(palette),
      directed_(directed),
      adj_(n),
      total_(n * (palette + 1), 0),
      in_(n * (palette + 1), 0),
      out_(n * (palette + 1), 0),
      in_deg_(n, 0),
      out_deg_(n, 0) {}

void ColoredGraph::add_edge(const ColoredEdge& e, Step step) {
  adj_[e.tail].push_back({e.head, e.color, true, step});
  adj_[e.head].push_back({e.tail, e.color, false, step});
  ++total_[slot(e.tail, e.color)];
  ++total_[slot(e.head, e.color)];
  ++out_[slot(e.tail, e.color)];
  ++in_[slot(e.head, e.color)];
  ++out_deg_[e.tail];
  ++in_deg_[e.head];
  edges_.push_back(e);
  steps_.push_back(step);
}

std::optional<Color> ColoredGraph::edge_color(Vertex u, Vertex v) const noexcept {
  const Vertex a = (!directed_ && adj_[v].size() < adj_[u].size()) ? v : u;
  const Vertex b = a == u ? v : u;
  for (const auto& inc : adj_[a]) {
    if (inc.other != b) continue;
    if (directed_ && inc.outgoing != (a == u)) continue;
    return inc.color;
  }
  return std::nullopt;
}

bool ColoredGraph::traversable(Vertex u, Vertex v, Color c) const noexcept {
  auto col = edge_color(u, v);
  return col && *col == c;
}

bool ColoredGraph::fits_at(Vertex v, const Pattern& p) const noexcept {
  return directed_ ? fits_directed(in_counts(v), out_counts(v), p) : fits(counts(v), p);
}

std::uint32_t ColoredGraph::min_degree() const noexcept {
  std::uint32_t best = ~std::uint32_t{0};
  for (Vertex v = 0; v < n_; ++v) {
    best = std::min(best, directed_ ? std::min(in_deg_[v], out_deg_[v]) : degree(v));
  }
  return n_ ? best : 0;
}

ColoredGraph color_subgraph(const ColoredGraph& g, std::span<const Color> colors) {
  std::vector<bool> keep(g.palette() + 1, false);
  for (Color c : colors) {
    if (c >= 1 && c <= g.palette()) keep[c] = true;
  }
  ColoredGraph out(g.vertex_count(), g.palette(), g.directed());
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    if (keep[g.edges()[i].color]) out.add_edge(g.edges()[i], g.steps()[i]);
  }
  return out;
}

ColorCsr::ColorCsr(const ColoredGraph& g, Direction dir) : n_(g.vertex_count()), r_(g.palette()) {
  const std::size_t slots = n_ * (r_ + 1);
  start_.assign(slots + 1, 0);
  auto walkable = [&](const Incidence& inc) {
    if (!g.directed()) return true;
    return dir == Direction::Forward ? inc.outgoing : !inc.outgoing;
  };
  for (Vertex u = 0; u < n_; ++u) {
    for (const auto& inc : g.incident(u)) {
      if (walkable(inc)) ++start_[u * (r_ + 1) + inc.color + 1];
    }
  }
  for (std::size_t s = 0; s < slots; ++s) start_[s + 1] += start_[s];
  target_.resize(start_[slots]);
  color_.resize(start_[slots]);
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (Vertex u = 0; u < n_; ++u) {
    for (const auto& inc : g.incident(u)) {
      if (!walkable(inc)) continue;
      const std::size_t s = u * (r_ + 1) + inc.color;
      target_[fill[s]] = inc.other;
      color_[fill[s]] = inc.color;
      ++fill[s];
    }
  }
  for (std::size_t s = 0; s < slots; ++s) std::sort(target_.begin() + start_[s], target_.begin() + start_[s + 1]);
}

}  // namespace patternham
