#include "patternham/hamilton.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>

namespace patternham {

const char* to_string(SearchStatus s) noexcept {
  switch (s) {
    case SearchStatus::Found: return "found";
    case SearchStatus::NotFound: return "not_found";
    case SearchStatus::Exhausted: return "exhausted";
  }
  return "?";
}

namespace {

constexpr std::uint32_t kNone = 0xFFFFFFFFu;
constexpr std::size_t kHallMaxLength = 10;

// Edge-branching search with propagation to a fixpoint. Read in a Pi-direction, a
// vertex at phase f leaves along an edge of color Pi[f] to a phase f+1 vertex and
// arrives along an edge of color Pi[f-1] from a phase f-1 vertex. Every vertex keeps
// the set of phases still open to it; an edge survives only while some phase of each
// endpoint can use it, and is forced once every remaining choice at a vertex uses it.
class Finder {
 public:
  Finder(const ColoredGraph& g, const Pattern& p, std::uint64_t budget)
      : n_(g.vertex_count()), ell_(p.length()), directed_(g.directed()), pat_(p.colors()), budget_(budget) {
    if (ell_ > 64) throw CapacityError("the Hamilton finder supports patterns of length <= 64");
    edges_.reserve(g.edge_count());
    inc_.resize(n_);
    eid_.assign(n_ * n_, kNone);
    for (const auto& e : g.edges()) {
      const auto id = static_cast<std::uint32_t>(edges_.size());
      edges_.push_back(e);
      inc_[e.tail].push_back({id, e.head, e.color, true});
      inc_[e.head].push_back({id, e.tail, e.color, false});
      eid_[e.tail * n_ + e.head] = id;
      if (!directed_) eid_[e.head * n_ + e.tail] = id;
    }
  }

  SearchResult run() {
    SearchResult res;
    if (n_ < (directed_ ? 2u : 3u)) return res;
    const std::size_t m = edges_.size();
    alive_.assign(m, 1);
    forced_.assign(m, 0);
    mark_.assign(m, 0);
    cnt_.assign(m, 0);
    fdeg_.assign(n_, 0);
    fe_.assign(n_, {kNone, kNone});
    phase_.assign(n_, ell_ == 64 ? ~0ULL : (1ULL << ell_) - 1);
    mate_.resize(n_);
    std::iota(mate_.begin(), mate_.end(), Vertex{0});
    queued_.assign(n_, 0);
    for (Vertex v = 0; v < n_; ++v) enqueue(v);
    res.status = SearchStatus::NotFound;
    if (!propagate()) return res;
    if (search()) {
      res.status = SearchStatus::Found;
      res.cycle = cycle_;
    } else if (exhausted_) {
      res.status = SearchStatus::Exhausted;
    }
    res.nodes = nodes_;
    return res;
  }

 private:
  struct Inc {
    std::uint32_t e;
    Vertex w;
    Color color;
    bool out;
  };
  struct Live {
    std::uint32_t e;
    Color color;
    bool out;
    std::uint64_t wmask;
  };
  enum class Undo : std::uint8_t { Kill, Force, Phases, Mate };
  struct Entry {
    Undo kind;
    std::uint32_t id;
    std::uint64_t old;
  };

  std::size_t succ(std::size_t f) const { return f + 1 == ell_ ? 0 : f + 1; }
  std::size_t pred(std::size_t f) const { return f == 0 ? ell_ - 1 : f - 1; }
  bool has(Vertex w, std::size_t f) const { return (phase_[w] >> f) & 1; }
  bool open(Vertex v) const { return directed_ ? (fe_[v][0] == kNone || fe_[v][1] == kNone) : fdeg_[v] < 2; }

  void enqueue(Vertex v) {
    if (!queued_[v]) {
      queued_[v] = 1;
      queue_.push_back(v);
    }
  }

  void kill(std::uint32_t e) {
    alive_[e] = 0;
    trail_.push_back({Undo::Kill, e, 0});
    enqueue(edges_[e].tail);
    enqueue(edges_[e].head);
  }

  void set_mate(Vertex v, Vertex to) {
    trail_.push_back({Undo::Mate, v, mate_[v]});
    mate_[v] = to;
  }

  bool force(std::uint32_t e) {
    const Vertex a = edges_[e].tail, b = edges_[e].head;
    if (directed_ ? (fe_[a][0] != kNone || fe_[b][1] != kNone) : (fdeg_[a] == 2 || fdeg_[b] == 2)) return false;
    // a and b are chain ends; joining the two ends of one chain closes a cycle
    const Vertex x = mate_[a], y = mate_[b];
    if (x == b && forced_count_ + 1 != n_) return false;
    forced_[e] = 1;
    ++forced_count_;
    trail_.push_back({Undo::Force, e, 0});
    if (directed_) {
      fe_[a][0] = e;
      fe_[b][1] = e;
    } else {
      fe_[a][fdeg_[a]++] = e;
      fe_[b][fdeg_[b]++] = e;
    }
    if (x != b) {
      set_mate(x, y);
      set_mate(y, x);
      const std::uint32_t close = eid_[y * n_ + x];
      if (forced_count_ + 1 < n_ && close != kNone && alive_[close] && !forced_[close]) kill(close);
    }
    enqueue(a);
    enqueue(b);
    return true;
  }

  void undo(std::size_t to) {
    while (trail_.size() > to) {
      const Entry en = trail_.back();
      trail_.pop_back();
      switch (en.kind) {
        case Undo::Kill: alive_[en.id] = 1; break;
        case Undo::Phases: phase_[en.id] = en.old; break;
        case Undo::Mate: mate_[en.id] = static_cast<Vertex>(en.old); break;
        case Undo::Force: {
          const Vertex a = edges_[en.id].tail, b = edges_[en.id].head;
          forced_[en.id] = 0;
          --forced_count_;
          if (directed_) {
            fe_[a][0] = kNone;
            fe_[b][1] = kNone;
          } else {
            --fdeg_[a];
            --fdeg_[b];
          }
          break;
        }
      }
    }
  }

  // Re-derives the phases and usable edges of v. False on contradiction.
  bool process(Vertex v) {
    const std::uint64_t mask = phase_[v];
    std::uint64_t keep = 0;
    ++stamp_;
    std::uint32_t must[2] = {kNone, kNone};
    bool first = true;
    live_.clear();
    for (const auto& inc : inc_[v]) {
      if (alive_[inc.e]) live_.push_back({inc.e, inc.color, inc.out, phase_[inc.w]});
    }
    for (std::size_t f = 0; f < ell_; ++f) {
      if (!((mask >> f) & 1)) continue;
      S_.clear();
      P_.clear();
      const Color cs = pat_[f], cp = pat_[pred(f)];
      const std::uint64_t fs = 1ULL << succ(f), fp = 1ULL << pred(f);
      for (const auto& l : live_) {
        if ((!directed_ || l.out) && l.color == cs && (l.wmask & fs)) S_.push_back(l.e);
        if ((!directed_ || !l.out) && l.color == cp && (l.wmask & fp)) P_.push_back(l.e);
      }
      std::uint32_t fm[2] = {kNone, kNone};
      if (directed_) {
        const std::uint32_t fo = fe_[v][0], fi = fe_[v][1];
        if (fo != kNone && std::find(S_.begin(), S_.end(), fo) == S_.end()) continue;
        if (fi != kNone && std::find(P_.begin(), P_.end(), fi) == P_.end()) continue;
        if (S_.empty() || P_.empty()) continue;
        if (fo != kNone) S_.assign(1, fo);
        if (fi != kNone) P_.assign(1, fi);
        for (auto e : S_) mark_[e] = stamp_;
        for (auto e : P_) mark_[e] = stamp_;
        if (S_.size() == 1) fm[0] = S_[0];
        if (P_.size() == 1) fm[1] = P_[0];
      } else {
        // count assignments (succ, pred) of two distinct edges covering the forced ones
        const std::uint32_t f0 = fdeg_[v] > 0 ? fe_[v][0] : kNone, f1 = fdeg_[v] > 1 ? fe_[v][1] : kNone;
        std::uint32_t total = 0;
        touched_.clear();
        for (auto s : S_) {
          for (auto q : P_) {
            if (s == q) continue;
            if (f0 != kNone && s != f0 && q != f0) continue;
            if (f1 != kNone && s != f1 && q != f1) continue;
            ++total;
            for (auto e : {s, q}) {
              if (cnt_[e]++ == 0) touched_.push_back(e);
            }
          }
        }
        if (total == 0) continue;
        int k = 0;
        for (auto e : touched_) {
          mark_[e] = stamp_;
          if (cnt_[e] == total && k < 2) fm[k++] = e;
          cnt_[e] = 0;
        }
      }
      keep |= 1ULL << f;
      if (first) {
        must[0] = fm[0];
        must[1] = fm[1];
        first = false;
      } else {
        for (auto& x : must) {
          if (x != kNone && x != fm[0] && x != fm[1]) x = kNone;
        }
      }
    }
    if (keep == 0) return false;
    if (keep != mask) {
      trail_.push_back({Undo::Phases, v, mask});
      phase_[v] = keep;
      for (const auto& inc : inc_[v]) {
        if (alive_[inc.e]) enqueue(inc.w);
      }
    }
    for (const auto& inc : inc_[v]) {
      if (alive_[inc.e] && !forced_[inc.e] && mark_[inc.e] != stamp_) kill(inc.e);
    }
    for (auto e : must) {
      if (e != kNone && !forced_[e] && !force(e)) return false;
    }
    return true;
  }

  bool propagate() {
    bool ok = true;
    for (std::size_t i = 0; i < queue_.size(); ++i) {
      const Vertex v = queue_[i];
      queued_[v] = 0;
      if (ok && !process(v)) ok = false;
    }
    queue_.clear();
    return ok;
  }

  // Each phase class holds exactly n / ell vertices of the cycle, so (Hall) no set T of
  // phases may be the only option for more than |T| n / ell vertices.
  bool phases_balance() {
    if (ell_ == 1) return true;
    const std::size_t need = n_ / ell_;
    if (ell_ <= kHallMaxLength) {
      const std::size_t full = std::size_t{1} << ell_;
      hall_.assign(full, 0);
      for (Vertex v = 0; v < n_; ++v) ++hall_[phase_[v]];
      for (std::size_t b = 0; b < ell_; ++b) {
        for (std::size_t m = 0; m < full; ++m) {
          if (m >> b & 1) hall_[m] += hall_[m ^ (std::size_t{1} << b)];
        }
      }
      for (std::size_t m = 1; m < full; ++m) {
        if (hall_[m] > static_cast<std::size_t>(std::popcount(m)) * need) return false;
      }
      return true;
    }
    std::vector<std::uint32_t> any(ell_, 0), only(ell_, 0);
    for (Vertex v = 0; v < n_; ++v) {
      const std::uint64_t m = phase_[v];
      for (std::size_t f = 0; f < ell_; ++f) {
        if ((m >> f) & 1) ++any[f];
      }
      if ((m & (m - 1)) == 0) ++only[std::countr_zero(m)];
    }
    for (std::size_t f = 0; f < ell_; ++f) {
      if (any[f] < need || only[f] > need) return false;
    }
    return true;
  }

  // Undirected: the alive graph must be 2-connected. Directed: strongly connected.
  bool connected_enough() {
    if (directed_) return reaches_all(true) && reaches_all(false);
    disc_.assign(n_, 0);
    low_.assign(n_, 0);
    std::uint32_t time = 0;
    struct Frame {
      Vertex v;
      std::uint32_t parent_edge;
      std::size_t i;
    };
    std::vector<Frame> st;
    st.push_back({0, kNone, 0});
    disc_[0] = low_[0] = ++time;
    std::size_t root_children = 0;
    while (!st.empty()) {
      auto& fr = st.back();
      if (fr.i < inc_[fr.v].size()) {
        const auto inc = inc_[fr.v][fr.i++];
        if (!alive_[inc.e] || inc.e == fr.parent_edge) continue;
        if (disc_[inc.w]) {
          low_[fr.v] = std::min(low_[fr.v], disc_[inc.w]);
        } else {
          disc_[inc.w] = low_[inc.w] = ++time;
          if (fr.v == 0) ++root_children;
          st.push_back({inc.w, inc.e, 0});
        }
      } else {
        const Vertex v = fr.v;
        st.pop_back();
        if (st.empty()) break;
        const Vertex u = st.back().v;
        low_[u] = std::min(low_[u], low_[v]);
        if (u != 0 && low_[v] >= disc_[u]) return false;  // u is a cut vertex
      }
    }
    return time == n_ && root_children == 1;
  }

  bool reaches_all(bool forward) {
    seen_.assign(n_, 0);
    stack_.assign(1, 0);
    seen_[0] = 1;
    std::size_t count = 1;
    while (!stack_.empty()) {
      const Vertex v = stack_.back();
      stack_.pop_back();
      for (const auto& inc : inc_[v]) {
        if (!alive_[inc.e] || inc.out != forward || seen_[inc.w]) continue;
        seen_[inc.w] = 1;
        ++count;
        stack_.push_back(inc.w);
      }
    }
    return count == n_;
  }

  bool accept_leaf() {
    cycle_.clear();
    std::vector<Color> colors;
    Vertex v = 0;
    std::uint32_t came = kNone;
    for (std::size_t i = 0; i < n_; ++i) {
      cycle_.push_back(v);
      std::uint32_t e = fe_[v][0];
      if (!directed_ && e == came) e = fe_[v][1];
      colors.push_back(edges_[e].color);
      v = edges_[e].tail == v ? edges_[e].head : edges_[e].tail;
      came = e;
    }
    auto reads = [&](auto first, auto last) {
      for (std::size_t l = 0; l < ell_; ++l) {
        std::size_t i = 0;
        for (auto it = first; it != last && *it == pat_[(i + l) % ell_]; ++it) ++i;
        if (i == n_) return true;
      }
      return false;
    };
    if (reads(colors.begin(), colors.end())) return true;
    if (!directed_ && reads(colors.rbegin(), colors.rend())) {
      std::reverse(cycle_.begin(), cycle_.end());
      std::rotate(cycle_.begin(), cycle_.end() - 1, cycle_.end());
      return true;
    }
    return false;
  }

  bool search() {
    if (++nodes_ > budget_) {
      exhausted_ = true;
      return false;
    }
    if (!phases_balance() || !connected_enough()) return false;
    if (forced_count_ == n_) return accept_leaf();

    // branch on the open vertex with the fewest free edges, at its tightest neighbor
    Vertex best = 0;
    std::uint64_t best_key = UINT64_MAX;
    for (Vertex v = 0; v < n_; ++v) {
      if (!open(v)) continue;
      std::uint64_t free = 0;
      for (const auto& inc : inc_[v]) free += alive_[inc.e] && !forced_[inc.e] && role_open(v, inc);
      if (!directed_ && fdeg_[v] == 1 && free > 0) free = free * 2 - 1;  // prefer chain ends
      const std::uint64_t key = free << 32 | v;
      if (key < best_key) {
        best_key = key;
        best = v;
      }
    }
    std::uint32_t pick = kNone;
    std::uint64_t pick_key = UINT64_MAX;
    for (const auto& inc : inc_[best]) {
      if (!alive_[inc.e] || forced_[inc.e] || !role_open(best, inc)) continue;
      std::uint64_t d = 0;
      for (const auto& j : inc_[inc.w]) d += alive_[j.e];
      const std::uint64_t key = d << 32 | inc.w;
      if (key < pick_key) {
        pick_key = key;
        pick = inc.e;
      }
    }
    if (pick == kNone) return false;

    const std::size_t mark = trail_.size();
    if (force(pick) && propagate() && search()) return true;
    queue_clear();
    undo(mark);
    if (exhausted_) return false;
    kill(pick);
    if (propagate() && search()) return true;
    undo(mark);
    return false;
  }

  bool role_open(Vertex v, const Inc& inc) const {
    if (!directed_) return true;
    return inc.out ? fe_[v][0] == kNone : fe_[v][1] == kNone;
  }

  void queue_clear() {
    for (auto v : queue_) queued_[v] = 0;
    queue_.clear();
  }

  std::size_t n_, ell_;
  bool directed_;
  std::vector<Color> pat_;
  std::uint64_t budget_;
  std::vector<ColoredEdge> edges_;
  std::vector<std::vector<Inc>> inc_;
  std::vector<std::uint32_t> eid_;

  std::vector<char> alive_, forced_;
  std::vector<std::uint8_t> fdeg_;
  std::vector<std::array<std::uint32_t, 2>> fe_;  // directed: {out, in}
  std::vector<std::uint64_t> phase_;
  std::vector<Vertex> mate_;
  std::size_t forced_count_ = 0;
  std::vector<Entry> trail_;
  std::vector<Vertex> queue_;
  std::vector<char> queued_;

  std::vector<std::uint32_t> mark_, cnt_, S_, P_, touched_;
  std::vector<Live> live_;
  std::uint32_t stamp_ = 0;
  std::vector<std::uint32_t> disc_, low_;
  std::vector<std::size_t> hall_;
  std::vector<char> seen_;
  std::vector<Vertex> stack_;

  std::vector<Vertex> cycle_;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;
};

void require_divisible(const ColoredGraph& g, const Pattern& p) {
  if (g.vertex_count() % p.length() != 0) {
    throw ConfigError("pattern length " + std::to_string(p.length()) + " does not divide n = " +
                      std::to_string(g.vertex_count()));
  }
}

}  // namespace

SearchResult find_pi_hamilton(const ColoredGraph& g, const Pattern& p, SearchBudget budget) {
  require_divisible(g, p);
  return Finder(g, p, budget.max_nodes).run();
}

SearchResult find_pi_hamilton_directed(const ColoredGraph& g, const Pattern& p, SearchBudget budget) {
  if (!g.directed()) throw ConfigError("find_pi_hamilton_directed expects a directed graph");
  return find_pi_hamilton(g, p, budget);
}

std::optional<std::vector<Vertex>> brute_force_pi_hamilton(const ColoredGraph& g, const Pattern& p) {
  const std::size_t n = g.vertex_count();
  if (n > kBruteForceMaxVertices) {
    throw CapacityError("brute force is limited to n <= " + std::to_string(kBruteForceMaxVertices));
  }
  const std::size_t ell = p.length();
  if (n < (g.directed() ? 2u : 3u) || n % ell != 0) return std::nullopt;

  std::vector<int> col(n * n, 0);
  for (const auto& e : g.edges()) {
    col[e.tail * n + e.head] = e.color;
    if (!g.directed()) col[e.head * n + e.tail] = e.color;
  }
  const auto& pat = p.colors();
  auto matches = [&](const std::vector<int>& seq) {
    for (std::size_t l = 0; l < ell; ++l) {
      std::size_t i = 0;
      while (i < n && seq[i] == pat[(i + l) % ell]) ++i;
      if (i == n) return true;
    }
    return false;
  };

  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> seq(n), rev(n);
  do {
    bool edges = true;
    for (std::size_t i = 0; i < n && edges; ++i) {
      seq[i] = col[perm[i] * n + perm[(i + 1) % n]];
      edges = seq[i] != 0;
    }
    if (!edges) continue;
    if (matches(seq)) return perm;
    if (!g.directed()) {
      std::reverse_copy(seq.begin(), seq.end(), rev.begin());
      if (matches(rev)) return perm;
    }
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return std::nullopt;
}

}  // namespace patternham
