#include "patternham/matching.hpp"

#include <limits>
#include <stdexcept>

namespace patternham {

void BipartiteGraph::add_edge(std::uint32_t l, std::uint32_t r) {
  if (l >= adj_.size() || r >= right_) throw std::out_of_range("bipartite edge out of range");
  adj_[l].push_back(r);
}

namespace {

constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

class HopcroftKarp {
 public:
  explicit HopcroftKarp(const BipartiteGraph& g)
      : g_(g), dist_(g.left_size()), it_(g.left_size()) {
    m_.left_mate.assign(g.left_size(), kUnmatched);
    m_.right_mate.assign(g.right_size(), kUnmatched);
  }

  Matching run() {
    while (layer()) {
      for (std::uint32_t u = 0; u < g_.left_size(); ++u) it_[u] = 0;
      for (std::uint32_t u = 0; u < g_.left_size(); ++u)
        if (m_.left_mate[u] == kUnmatched && augment(u)) ++m_.size;
    }
    return std::move(m_);
  }

 private:
  // BFS from all free left vertices; true when some free right vertex is reachable.
  bool layer() {
    queue_.clear();
    for (std::uint32_t u = 0; u < g_.left_size(); ++u) {
      if (m_.left_mate[u] == kUnmatched) {
        dist_[u] = 0;
        queue_.push_back(u);
      } else {
        dist_[u] = kInf;
      }
    }
    bool found = false;
    for (std::size_t h = 0; h < queue_.size(); ++h) {
      const std::uint32_t u = queue_[h];
      for (std::uint32_t r : g_.neighbors(u)) {
        const std::uint32_t w = m_.right_mate[r];
        if (w == kUnmatched) {
          found = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          queue_.push_back(w);
        }
      }
    }
    return found;
  }

  bool augment(std::uint32_t u) {
    const auto& nb = g_.neighbors(u);
    for (; it_[u] < nb.size(); ++it_[u]) {
      const std::uint32_t r = nb[it_[u]];
      const std::uint32_t w = m_.right_mate[r];
      if (w == kUnmatched || (dist_[w] == dist_[u] + 1 && augment(w))) {
        m_.left_mate[u] = r;
        m_.right_mate[r] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  const BipartiteGraph& g_;
  Matching m_;
  std::vector<std::uint32_t> dist_;
  std::vector<std::size_t> it_;
  std::vector<std::uint32_t> queue_;
};

}  // namespace

Matching hopcroft_karp(const BipartiteGraph& g) { return HopcroftKarp(g).run(); }

std::vector<std::uint32_t> hall_violator(const BipartiteGraph& g, const Matching& m) {
  std::vector<char> seen(g.left_size(), 0);
  std::vector<std::uint32_t> out;
  for (std::uint32_t u = 0; u < g.left_size(); ++u) {
    if (m.left_mate[u] != kUnmatched || seen[u]) continue;
    seen[u] = 1;
    out.push_back(u);
  }
  // alternating BFS: non-matching edge to the right, matching edge back
  for (std::size_t h = 0; h < out.size(); ++h) {
    for (std::uint32_t r : g.neighbors(out[h])) {
      const std::uint32_t w = m.right_mate[r];
      if (w != kUnmatched && !seen[w]) {
        seen[w] = 1;
        out.push_back(w);
      }
    }
  }
  return out;
}

}  // namespace patternham
