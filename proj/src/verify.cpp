#include "patternham/verify.hpp"

#include <algorithm>
#include <atomic>

namespace patternham {

std::optional<std::size_t> pi_path_offset(std::span<const Color> colors, const Pattern& p) {
  for (std::size_t l = 0; l < p.length(); ++l) {
    bool ok = true;
    for (std::size_t j = 0; j < colors.size() && ok; ++j) ok = colors[j] == p.phase(j + l);
    if (ok) return l;
  }
  return std::nullopt;
}

namespace {

// With ell | k a rotation only shifts the offset, so one pass per direction suffices.
bool cycle_reads_forward(std::span<const Color> colors, const Pattern& p) {
  return !colors.empty() && colors.size() % p.length() == 0 && pi_path_offset(colors, p).has_value();
}

}  // namespace

bool is_pi_cycle(std::span<const Color> colors, const Pattern& p) {
  if (cycle_reads_forward(colors, p)) return true;
  std::vector<Color> rev(colors.rbegin(), colors.rend());
  return cycle_reads_forward(rev, p);
}

Verdict verify_pi_hamilton(const ColoredGraph& g, const Pattern& p, std::span<const Vertex> cycle) {
  const std::size_t n = g.vertex_count();
  if (cycle.size() != n) {
    return Verdict::fail("cycle has " + std::to_string(cycle.size()) + " vertices, graph has " + std::to_string(n));
  }
  if (n < (g.directed() ? 2u : 3u)) return Verdict::fail("graph too small for a Hamilton cycle");
  std::vector<bool> seen(n, false);
  for (Vertex v : cycle) {
    if (v >= n) return Verdict::fail("vertex " + std::to_string(v + 1) + " out of range");
    if (seen[v]) return Verdict::fail("vertex " + std::to_string(v + 1) + " repeated");
    seen[v] = true;
  }
  std::vector<Color> colors(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex a = cycle[i], b = cycle[(i + 1) % n];
    auto c = g.edge_color(a, b);
    if (!c) {
      return Verdict::fail("missing " + std::string(g.directed() ? "arc " : "edge ") + std::to_string(a + 1) +
                           (g.directed() ? "->" : "-") + std::to_string(b + 1));
    }
    colors[i] = *c;
  }
  const bool ok = g.directed() ? cycle_reads_forward(colors, p) : is_pi_cycle(colors, p);
  if (!ok) return Verdict::fail("color sequence is not " + p.to_string() + "-colored");
  return {};
}

namespace {

// Product-graph scan from one source: multi-root BFS over (vertex, phase) states
// with parent pointers. A tree walk whose states are each the first discovery of
// their vertex is automatically a simple path.
class SourceScan {
 public:
  enum Status : std::uint8_t { Unreached = 0, Certified = 1, WalkOnly = 2 };

  SourceScan(const ColorCsr& fwd, const Pattern& p)
      : fwd_(fwd), p_(p), n_(fwd.vertex_count()), ell_(p.length()),
        parent_(n_ * ell_), stamp_(n_ * ell_, 0), good_(n_ * ell_, 0),
        first_(n_), vstamp_(n_, 0), mark_(n_, 0) {
    queue_.reserve(n_ * ell_);
  }

  // Fills status[v] for every v != u. status[u] is Certified (empty path).
  void run(Vertex u, std::span<std::uint8_t> status) {
    ++round_;
    queue_.clear();
    first_[u] = kNone;
    vstamp_[u] = round_;
    for (std::size_t l = 0; l < ell_; ++l) {
      const std::uint32_t s = static_cast<std::uint32_t>(u * ell_ + l);
      stamp_[s] = round_;
      parent_[s] = s;
      good_[s] = 1;
      queue_.push_back(s);
    }
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const std::uint32_t s = queue_[head];
      const Vertex x = s / ell_;
      const std::size_t ph = s % ell_;
      const std::size_t nph = ph + 1 == ell_ ? 0 : ph + 1;
      for (Vertex y : fwd_.neighbors(x, p_.phase(ph))) {
        const std::uint32_t t = static_cast<std::uint32_t>(y * ell_ + nph);
        if (stamp_[t] == round_) continue;
        stamp_[t] = round_;
        parent_[t] = s;
        if (vstamp_[y] != round_) {
          vstamp_[y] = round_;
          first_[y] = t;
          good_[t] = good_[s];
        } else {
          good_[t] = 0;
        }
        queue_.push_back(t);
      }
    }
    for (Vertex v = 0; v < n_; ++v) {
      if (v == u) {
        status[v] = Certified;
      } else if (vstamp_[v] != round_) {
        status[v] = Unreached;
      } else if (good_[first_[v]]) {
        status[v] = Certified;
      } else {
        status[v] = WalkOnly;
        for (std::size_t ph = 0; ph < ell_; ++ph) {
          const std::uint32_t s = static_cast<std::uint32_t>(v * ell_ + ph);
          if (stamp_[s] == round_ && tree_walk_simple(s)) {
            status[v] = Certified;
            break;
          }
        }
      }
    }
  }

  // Tree walk ending at a Certified vertex, as (vertices, colors, root offset).
  std::optional<PiPath> tree_path(Vertex v) {
    for (std::size_t ph = 0; ph < ell_; ++ph) {
      const std::uint32_t s = static_cast<std::uint32_t>(v * ell_ + ph);
      if (stamp_[s] != round_ || !tree_walk_simple(s)) continue;
      PiPath path;
      std::uint32_t cur = s;
      while (parent_[cur] != cur) {
        path.vertices.push_back(cur / ell_);
        path.colors.push_back(p_.phase(parent_[cur] % ell_));
        cur = parent_[cur];
      }
      path.vertices.push_back(cur / ell_);
      std::reverse(path.vertices.begin(), path.vertices.end());
      std::reverse(path.colors.begin(), path.colors.end());
      path.offset = cur % ell_;
      return path;
    }
    return std::nullopt;
  }

 private:
  static constexpr std::uint32_t kNone = ~std::uint32_t{0};

  bool tree_walk_simple(std::uint32_t s) {
    ++mark_round_;
    for (std::uint32_t cur = s;; cur = parent_[cur]) {
      const Vertex x = cur / ell_;
      if (mark_[x] == mark_round_) return false;
      mark_[x] = mark_round_;
      if (parent_[cur] == cur) return true;
    }
  }

  const ColorCsr& fwd_;
  const Pattern& p_;
  std::size_t n_, ell_;
  std::vector<std::uint32_t> parent_, stamp_;
  std::vector<std::uint8_t> good_;
  std::vector<std::uint32_t> first_, vstamp_, mark_;
  std::vector<std::uint32_t> queue_;
  std::uint32_t round_ = 0, mark_round_ = 0;
};

// Exact search for a simple Pi-colored u -> v path. The search runs forward from u
// and backward from v with doubling node budgets until one side settles; a local
// obstruction near either endpoint is then found from that side. Each extension must
// still reach the far endpoint through vertices off the current path.
class SimplePathSearch {
 public:
  SimplePathSearch(const ColorCsr& fwd, const ColorCsr& bwd, const Pattern& p)
      : fwd_(fwd), bwd_(bwd), p_(p), n_(fwd.vertex_count()), ell_(p.length()),
        on_path_(n_, false), seen_(n_ * ell_, 0) {
    queue_.reserve(n_ * ell_);
  }

  std::optional<PiPath> find(Vertex u, Vertex v) {
    for (std::uint64_t budget = 1024;; budget *= 2) {
      for (bool forward : {true, false}) {
        auto r = run(forward ? u : v, forward ? v : u, forward, budget);
        if (r.status == Settled::Found) return forward ? r.path : reversed(std::move(r.path));
        if (r.status == Settled::Absent) return std::nullopt;
      }
    }
  }

 private:
  enum class Settled { Found, Absent, OutOfBudget };
  struct Result {
    Settled status;
    PiPath path;
  };

  // Forward state (x, ph): the next edge leaves x with color Pi[ph].
  // Backward state (x, ph): the edge entering x has color Pi[ph].
  std::size_t next_phase(std::size_t ph, bool forward) const {
    if (forward) return ph + 1 == ell_ ? 0 : ph + 1;
    return ph == 0 ? ell_ - 1 : ph - 1;
  }

  bool reaches(Vertex y, std::size_t ph, Vertex target, bool forward) {
    const ColorCsr& csr = forward ? fwd_ : bwd_;
    ++round_;
    queue_.clear();
    const auto s0 = static_cast<std::uint32_t>(y * ell_ + ph);
    seen_[s0] = round_;
    queue_.push_back(s0);
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const Vertex x = queue_[head] / ell_;
      const std::size_t xph = queue_[head] % ell_;
      const std::size_t nph = next_phase(xph, forward);
      for (Vertex z : csr.neighbors(x, p_.phase(xph))) {
        if (z == target) return true;
        if (on_path_[z]) continue;
        const auto t = static_cast<std::uint32_t>(z * ell_ + nph);
        if (seen_[t] == round_) continue;
        seen_[t] = round_;
        queue_.push_back(t);
      }
    }
    return false;
  }

  Result run(Vertex from, Vertex to, bool forward, std::uint64_t budget) {
    const ColorCsr& csr = forward ? fwd_ : bwd_;
    struct Frame {
      Vertex x;
      std::size_t ph;
      std::size_t next;
    };
    std::uint64_t work = 0;
    std::vector<Frame> stack;
    for (std::size_t l = 0; l < ell_; ++l) {
      on_path_[from] = true;
      if (!reaches(from, l, to, forward)) continue;
      stack.assign(1, {from, l, 0});
      while (!stack.empty()) {
        if (++work > budget) {
          for (const auto& f : stack) on_path_[f.x] = false;
          return {Settled::OutOfBudget, {}};
        }
        Frame& f = stack.back();
        auto nbrs = csr.neighbors(f.x, p_.phase(f.ph));
        const std::size_t nph = next_phase(f.ph, forward);
        bool pushed = false;
        while (f.next < nbrs.size()) {
          const Vertex y = nbrs[f.next++];
          if (y == to) {
            PiPath path;
            for (const auto& fr : stack) {
              path.vertices.push_back(fr.x);
              path.colors.push_back(p_.phase(fr.ph));
            }
            path.vertices.push_back(to);
            path.offset = l;
            for (const auto& fr : stack) on_path_[fr.x] = false;
            return {Settled::Found, std::move(path)};
          }
          if (on_path_[y]) continue;
          on_path_[y] = true;
          if (!reaches(y, nph, to, forward)) {
            on_path_[y] = false;
            continue;
          }
          stack.push_back({y, nph, 0});
          pushed = true;
          break;
        }
        if (!pushed) {
          on_path_[stack.back().x] = false;
          stack.pop_back();
        }
      }
    }
    on_path_[from] = false;
    return {Settled::Absent, {}};
  }

  // A backward search lists v, ..., u with colors in reverse; turn it around.
  PiPath reversed(PiPath path) const {
    std::reverse(path.vertices.begin(), path.vertices.end());
    std::reverse(path.colors.begin(), path.colors.end());
    path.offset = 0;
    for (std::size_t l = 0; l < ell_; ++l) {
      if (p_.phase(l) == path.colors.front()) {
        bool ok = true;
        for (std::size_t j = 0; j < path.colors.size() && ok; ++j) ok = path.colors[j] == p_.phase((j + l) % ell_);
        if (ok) {
          path.offset = l;
          break;
        }
      }
    }
    return path;
  }

  const ColorCsr& fwd_;
  const ColorCsr& bwd_;
  const Pattern& p_;
  std::size_t n_, ell_;
  std::vector<bool> on_path_;
  std::vector<std::uint32_t> seen_, queue_;
  std::uint32_t round_ = 0;
};

bool has_isolated(const ColoredGraph& g) {
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (g.directed() ? (g.in_degree(v) == 0 || g.out_degree(v) == 0) : g.degree(v) == 0) return true;
  }
  return false;
}

bool connectivity(const ColoredGraph& g, const Pattern& p, Execution ex) {
  const std::size_t n = g.vertex_count();
  if (n <= 1) return true;
  if (has_isolated(g)) return false;
  const ColorCsr fwd(g, ColorCsr::Direction::Forward);
  std::vector<std::uint8_t> status(n * n, 0);
  std::atomic<bool> failed{false};
  const bool directed = g.directed();

  if (ex == Execution::Parallel) {
#pragma omp parallel
    {
      SourceScan scan(fwd, p);
#pragma omp for schedule(dynamic, 4)
      for (std::int64_t u = 0; u < static_cast<std::int64_t>(n); ++u) {
        if (failed.load(std::memory_order_relaxed)) continue;
        auto row = std::span(status).subspan(u * n, n);
        scan.run(static_cast<Vertex>(u), row);
        if (directed && std::find(row.begin(), row.end(), SourceScan::Unreached) != row.end()) {
          failed.store(true, std::memory_order_relaxed);
        }
      }
    }
  } else {
    SourceScan scan(fwd, p);
    for (Vertex u = 0; u < n && !failed; ++u) {
      auto row = std::span(status).subspan(static_cast<std::size_t>(u) * n, n);
      scan.run(u, row);
      if (directed && std::find(row.begin(), row.end(), SourceScan::Unreached) != row.end()) failed = true;
    }
  }
  if (failed) return false;

  auto at = [&](Vertex a, Vertex b) { return status[static_cast<std::size_t>(a) * n + b]; };
  std::vector<std::pair<Vertex, Vertex>> pending;
  for (Vertex a = 0; a < n; ++a) {
    for (Vertex b = directed ? 0 : a + 1; b < n; ++b) {
      if (a == b) continue;
      if (directed) {
        if (at(a, b) == SourceScan::WalkOnly) pending.emplace_back(a, b);
      } else {
        const auto ab = at(a, b), ba = at(b, a);
        if (ab == SourceScan::Certified || ba == SourceScan::Certified) continue;
        if (ab == SourceScan::Unreached && ba == SourceScan::Unreached) return false;
        pending.emplace_back(a, b);
      }
    }
  }
  if (pending.empty()) return true;
  const ColorCsr bwd(g, ColorCsr::Direction::Backward);
  SimplePathSearch search(fwd, bwd, p);
  for (auto [a, b] : pending) {
    if (at(a, b) != SourceScan::Unreached && search.find(a, b)) continue;
    if (!directed && at(b, a) != SourceScan::Unreached && search.find(b, a)) continue;
    return false;
  }
  return true;
}

}  // namespace

std::vector<std::vector<bool>> pi_reachability(const ColoredGraph& g, const Pattern& p, Vertex source) {
  const std::size_t n = g.vertex_count(), ell = p.length();
  const ColorCsr fwd(g);
  std::vector<std::vector<bool>> out(ell, std::vector<bool>(n, false));
  std::vector<std::uint8_t> seen(n * ell);
  std::vector<std::uint32_t> queue;
  for (std::size_t l = 0; l < ell; ++l) {
    std::fill(seen.begin(), seen.end(), 0);
    queue.assign(1, static_cast<std::uint32_t>(source * ell + l));
    seen[queue[0]] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Vertex x = queue[head] / ell;
      const std::size_t ph = queue[head] % ell;
      out[l][x] = true;
      for (Vertex y : fwd.neighbors(x, p.phase(ph))) {
        const std::uint32_t t = static_cast<std::uint32_t>(y * ell + (ph + 1) % ell);
        if (!seen[t]) {
          seen[t] = 1;
          queue.push_back(t);
        }
      }
    }
  }
  return out;
}

std::optional<PiPath> extract_pi_path(const ColoredGraph& g, const Pattern& p, Vertex u, Vertex v) {
  if (u == v) return PiPath{};
  const ColorCsr fwd(g);
  SourceScan scan(fwd, p);
  std::vector<std::uint8_t> status(g.vertex_count());
  scan.run(u, status);
  std::optional<PiPath> path;
  if (status[v] == SourceScan::Certified) {
    path = scan.tree_path(v);
  } else if (status[v] == SourceScan::WalkOnly) {
    path = SimplePathSearch(fwd, ColorCsr(g, ColorCsr::Direction::Backward), p).find(u, v);
  }
  if (path) path->offset = *pi_path_offset(path->colors, p);
  return path;
}

bool is_pi_connected(const ColoredGraph& g, const Pattern& p, Execution ex) {
  if (g.directed()) throw ConfigError("is_pi_connected expects an undirected graph");
  return connectivity(g, p, ex);
}

bool is_pi_strongly_connected(const ColoredGraph& g, const Pattern& p, Execution ex) {
  if (!g.directed()) throw ConfigError("is_pi_strongly_connected expects a directed graph");
  return connectivity(g, p, ex);
}

}  // namespace patternham
