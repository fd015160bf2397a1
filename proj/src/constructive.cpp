#include "patternham/constructive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "patternham/hitting.hpp"
#include "patternham/matching.hpp"
#include "patternham/rng.hpp"
#include "patternham/verify.hpp"

namespace patternham {

const char* to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Setup: return "setup";
    case Stage::Classify: return "classify";
    case Stage::Cover: return "cover";
    case Stage::Rebalance: return "rebalance";
    case Stage::Matchings: return "matchings";
    case Stage::Endpoints: return "endpoints";
    case Stage::TwoFactor: return "two_factor";
    case Stage::Merge: return "merge";
    case Stage::Done: return "done";
  }
  return "?";
}

namespace {

// Edge v -> w may be walked in that direction.
bool forward_ok(const ColoredGraph& g, const Incidence& inc) { return !g.directed() || inc.outgoing; }
bool backward_ok(const ColoredGraph& g, const Incidence& inc) { return !g.directed() || !inc.outgoing; }

// Pattern color for a 1-based position that may be zero or negative.
Color color_at(const Pattern& p, long pos) {
  const long ell = static_cast<long>(p.length());
  return p.colors()[static_cast<std::size_t>(((pos - 1) % ell + ell) % ell)];
}

}  // namespace

PipelineSetup prepare_pipeline(const ColoredProcess& proc, const Pattern& p, const PipelineConfig& cfg) {
  PipelineSetup s;
  s.n = proc.n;
  s.ell = p.length();
  if (s.ell < 2) throw ConfigError("the pipeline needs a pattern of length at least 2");
  if (s.n % s.ell != 0) throw ConfigError("pattern length must divide n");
  if (p.palette() != proc.r) throw ConfigError("pattern palette differs from the process palette");
  if (cfg.quota < 1) throw ConfigError("quota must be positive");
  s.demand = proc.directed ? directed_demand(p).demand : demand(p).demand;
  const double logn = std::log(static_cast<double>(s.n));
  s.eps = cfg.eps.value_or(static_cast<double>(proc.r) / (8.0 * s.ell * s.demand));
  s.beta = cfg.beta.value_or(0.0);
  if (s.eps <= 0) throw ConfigError("eps must be positive");
  s.bad_threshold = cfg.bad_threshold.value_or(std::floor(s.beta * logn));
  s.tbad_threshold = std::log(logn);
  s.mu = s.eps * static_cast<double>(s.n) * logn;
  for (std::size_t i = 0; i <= 2 * s.ell; ++i) s.t.push_back(static_cast<Step>(std::floor(i * s.mu)));
  if (s.t.back() > proc.length()) throw ConfigError("process too short for 2 ell windows");
  if (cfg.reference_time) {
    s.reference = *cfg.reference_time;
  } else {
    auto fit = tau_fit(proc, p);
    if (!fit) throw ConfigError("the pattern never fits this process");
    s.reference = *fit;
  }
  if (s.reference > proc.length()) throw ConfigError("reference time beyond the process");
  s.layer.resize(s.n);
  const std::size_t block = s.n / s.ell;
  for (Vertex v = 0; v < s.n; ++v)
    s.layer[v] = static_cast<std::uint32_t>(cfg.interleaved_layers ? v % s.ell : v / block);
  return s;
}

BadClassification classify_bad(const ColoredGraph& g, const Pattern& p, const PipelineSetup& s, bool strict) {
  const std::size_t n = g.vertex_count(), ell = s.ell;
  BadClassification out;
  out.bad_j.resize(2 * ell);
  out.bad.assign(n, 0);
  out.tbad.assign(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    const std::uint32_t a = s.layer[v];
    const std::uint32_t next = (a + 1) % ell, prev = (a + ell - 1) % ell;
    const Color fwd = p.phase(a), bwd = p.phase(prev);
    std::size_t nf = 0, nb = 0;
    for (const auto& inc : g.incident(v)) {
      if (inc.color == fwd && s.layer[inc.other] == next && forward_ok(g, inc) &&
          (!strict || (inc.outgoing && in_window(s, a + 1, inc.step))))
        ++nf;
      if (inc.color == bwd && s.layer[inc.other] == prev && backward_ok(g, inc) &&
          (!strict || (!inc.outgoing && in_window(s, ell + a + 1, inc.step))))
        ++nb;
    }
    if (static_cast<double>(nf) <= s.bad_threshold) out.bad_j[a].push_back(v), out.bad[v] = 1;
    if (static_cast<double>(nb) <= s.bad_threshold) out.bad_j[ell + a].push_back(v), out.bad[v] = 1;
  }
  for (Vertex v = 0; v < n; ++v) {
    if (!out.bad[v]) continue;
    ++out.bad_count;
    int low = 0;
    for (int c = 1; c <= g.palette(); ++c)
      if (static_cast<double>(g.count(v, static_cast<Color>(c))) <= s.tbad_threshold) ++low;
    if (low >= s.demand) out.tbad[v] = 1, ++out.tbad_count;
  }
  for (Vertex v = 0; v < n; ++v) {
    std::size_t k = 0;
    for (const auto& inc : g.incident(v)) k += out.bad[inc.other];
    out.max_bad_degree = std::max(out.max_bad_degree, k);
  }
  return out;
}

BadClassification classify_bad(const ColoredProcess& proc, const Pattern& p, const PipelineConfig& cfg) {
  auto s = prepare_pipeline(proc, p, cfg);
  return classify_bad(snapshot(proc, s.reference), p, s, cfg.strict_windows);
}

namespace {

CoverResult cover_once(const ColoredGraph& g, const Pattern& p, const std::vector<char>& bad,
                       bool corrected_stopping, const std::vector<std::uint32_t>* layer,
                       const std::vector<char>* no_end, const std::vector<Vertex>& first) {
  const std::size_t n = g.vertex_count();
  const long ell = static_cast<long>(p.length());
  const Color join = p.at(p.length());
  CoverResult res;
  res.used.assign(n, 0);
  std::vector<char> taken(n, 0);  // this attempt
  std::vector<Vertex> trial;
  Vertex current = kNoVertex;
  auto free_vertex = [&](Vertex x) { return !res.used[x] && !taken[x]; };
  auto free_count = [&](Vertex u, Color c) {
    int k = 0;
    for (const auto& inc : g.incident(u)) k += inc.color == c && free_vertex(inc.other);
    return k;
  };
  // cost of consuming x: uncovered bad neighbors for which x is one of few options
  auto damage = [&](Vertex x) {
    int d = 0;
    for (const auto& inc : g.incident(x)) {
      const Vertex u = inc.other;
      if (!bad[u] || res.used[u] || taken[u] || u == current) continue;
      const int k = free_count(u, inc.color);
      d += k <= 1 ? 100 : k == 2 ? 10 : k == 3 ? 1 : 0;
    }
    return d;
  };
  // a head wants a Pi_ell edge into the first layer, a tail one from the last
  auto joinable = [&](Vertex x, bool head) {
    const std::uint32_t want = head ? 0 : static_cast<std::uint32_t>(ell - 1);
    for (const auto& inc : g.incident(x)) {
      if (inc.color != join || (*layer)[inc.other] != want || bad[inc.other] || !free_vertex(inc.other)) continue;
      if (head ? forward_ok(g, inc) : backward_ok(g, inc)) return true;
    }
    return false;
  };
  // endpoints: joinable and good, then joinable, then good, then anything allowed
  // can the path continue from x by a `next` edge to a free vertex other than `also`?
  auto continues = [&](Vertex x, Color next, bool outward, Vertex also) {
    for (const auto& inc : g.incident(x))
      if (inc.color == next && inc.other != also && free_vertex(inc.other) &&
          (outward ? forward_ok(g, inc) : backward_ok(g, inc)))
        return true;
    return false;
  };
  struct Pick {
    Vertex v = kNoVertex;
    bool end = false;
  };
  // At an endpoint position a vertex barred from ending is taken as interior instead,
  // as a last resort, and the path runs one more lap; `next` is the color after it.
  auto pick = [&](Vertex from, Color c, bool outward, Vertex not_this, bool end_pos, Color next) -> Pick {
    Pick best;
    long best_score = 0;
    for (const auto& inc : g.incident(from)) {
      if (inc.color != c || inc.other == not_this || !free_vertex(inc.other)) continue;
      if (!(outward ? forward_ok(g, inc) : backward_ok(g, inc))) continue;
      const bool end = end_pos && !(no_end && (*no_end)[inc.other]);
      long score = damage(inc.other);
      if (end) {
        const bool j = !layer || joinable(inc.other, outward);
        score += 1'000'000L * ((j ? 0 : 2) + (bad[inc.other] ? 1 : 0));
      } else {
        if (!continues(inc.other, next, outward, not_this)) score += 100'000'000L;
        if (end_pos) score += 1'000'000'000L;
        if (bad[inc.other] && !res.used[inc.other]) score -= 5;  // covered for free
      }
      if (best.v == kNoVertex || score < best_score) best = {inc.other, end}, best_score = score;
    }
    return best;
  };
  auto phase_of = [&](long pos) { return ((pos - 1) % ell + ell) % ell + 1; };
  auto head_done = [&](long pos) {
    if (corrected_stopping) return phase_of(pos) == ell - 1;
    return color_at(p, pos) == join;
  };

  std::vector<Vertex> pending;
  for (Vertex v = 0; v < n; ++v)
    if (bad[v]) pending.push_back(v);
  // most constrained first: fewest free neighbors in its scarcest pattern color
  auto slack = [&](Vertex v) {
    int lo = std::numeric_limits<int>::max();
    for (Color c : p.colors()) lo = std::min(lo, free_count(v, c));
    return lo;
  };

  while (!pending.empty()) {
    std::erase_if(pending, [&](Vertex v) { return res.used[v] != 0; });
    if (pending.empty()) break;
    std::size_t at = 0;
    bool promoted = false;
    for (Vertex f : first) {
      if (res.used[f]) continue;
      at = static_cast<std::size_t>(std::find(pending.begin(), pending.end(), f) - pending.begin());
      promoted = true;
      break;
    }
    int at_slack = promoted ? 0 : slack(pending[0]);
    for (std::size_t k = 1; k < pending.size() && !promoted; ++k) {
      const int sl = slack(pending[k]);
      if (sl < at_slack || (sl == at_slack && g.degree(pending[k]) < g.degree(pending[at]))) at = k, at_slack = sl;
    }
    const Vertex v = pending[at];
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(at));
    current = v;
    int worst = 0;
    bool done = false;
    for (long i = 1; i <= ell && !done; ++i) {
      for (Vertex x : trial) taken[x] = 0;
      trial = {v};
      taken[v] = 1;
      const Pick v1 = pick(v, color_at(p, i), false, kNoVertex, phase_of(i) == 1, color_at(p, i - 1));
      const Pick w1 = v1.v == kNoVertex ? Pick{}
                                        : pick(v, color_at(p, i + 1), true, v1.v, head_done(i + 1), color_at(p, i + 2));
      if (w1.v == kNoVertex) {
        worst = std::max(worst, 2);
        continue;
      }
      taken[v1.v] = taken[w1.v] = 1;
      trial.push_back(v1.v), trial.push_back(w1.v);
      std::vector<Vertex> head{w1.v}, tail{v1.v};
      bool head_end = w1.end, tail_end = v1.end;
      long pos = i + 1;
      bool stuck = false;
      // capped so a color that never recurs under the literal rule cannot loop
      while (!(head_done(pos) && head_end)) {
        if (pos - i > 4 * ell) { stuck = true; break; }
        const Pick x = pick(head.back(), color_at(p, pos + 1), true, kNoVertex, head_done(pos + 1), color_at(p, pos + 2));
        if (x.v == kNoVertex) { stuck = true; break; }
        taken[x.v] = 1, trial.push_back(x.v), head.push_back(x.v), head_end = x.end, ++pos;
      }
      if (stuck) {
        worst = std::max(worst, 3);
        continue;
      }
      pos = i;
      while (!(phase_of(pos) == 1 && tail_end)) {
        if (i - pos > 4 * ell) { stuck = true; break; }
        const Pick y = pick(tail.back(), color_at(p, pos - 1), false, kNoVertex, phase_of(pos - 1) == 1, color_at(p, pos - 2));
        if (y.v == kNoVertex) { stuck = true; break; }
        taken[y.v] = 1, trial.push_back(y.v), tail.push_back(y.v), tail_end = y.end, --pos;
      }
      if (stuck) {
        worst = std::max(worst, 4);
        continue;
      }
      CoverPath path;
      path.covered = v;
      path.vertices.assign(tail.rbegin(), tail.rend());
      path.vertices.push_back(v);
      path.vertices.insert(path.vertices.end(), head.begin(), head.end());
      for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k)
        path.colors.push_back(*g.edge_color(path.vertices[k], path.vertices[k + 1]));
      for (Vertex x : path.vertices) res.used[x] = 1;
      res.paths.push_back(std::move(path));
      done = true;
    }
    for (Vertex x : trial) taken[x] = 0;
    trial.clear();
    if (!done) {
      res.broke = CoverBreak{v, worst};
      return res;
    }
  }
  return res;
}

}  // namespace

CoverResult cover_bad(const ColoredGraph& g, const Pattern& p, const std::vector<char>& bad,
                      bool corrected_stopping, const std::vector<std::uint32_t>* layer,
                      const std::vector<char>* no_end) {
  std::vector<Vertex> first;
  while (true) {
    auto res = cover_once(g, p, bad, corrected_stopping, layer, no_end, first);
    if (!res.broke || first.size() >= kCoverRestarts ||
        std::find(first.begin(), first.end(), res.broke->vertex) != first.end())
      return res;
    first.insert(first.begin(), res.broke->vertex);
  }
}

Rebalanced rebalance(std::vector<std::vector<Vertex>> layers, std::uint64_t seed,
                     const std::function<bool(Vertex, std::uint32_t)>& eligible) {
  Rebalanced out;
  const std::size_t k = layers.size();
  if (k == 0) return out;
  std::size_t total = 0;
  for (const auto& l : layers) total += l.size();
  if (total % k != 0) throw ConfigError("layer sizes cannot be equalized");
  const std::size_t target = total / k;
  Xoshiro256 rng(seed);
  std::vector<std::size_t> cands;
  for (std::uint32_t to = 0; to < k; ++to) {
    while (layers[to].size() < target) {
      std::uint32_t from = 0;
      for (std::uint32_t j = 1; j < k; ++j)
        if (layers[j].size() > layers[from].size()) from = j;
      auto& src = layers[from];
      cands.clear();
      if (eligible)
        for (std::size_t x = 0; x < src.size(); ++x)
          if (eligible(src[x], to)) cands.push_back(x);
      const std::size_t at = cands.empty() ? bounded(rng, src.size()) : cands[bounded(rng, cands.size())];
      const Vertex v = src[at];
      src.erase(src.begin() + static_cast<std::ptrdiff_t>(at));
      layers[to].push_back(v);
      out.moves.push_back({v, from, to});
    }
  }
  out.layers = std::move(layers);
  return out;
}

std::optional<std::vector<Vertex>> perfect_matching(const ColoredGraph& g, const PipelineSetup* s,
                                                    const std::vector<Vertex>& left,
                                                    const std::vector<Vertex>& right, Color c,
                                                    const EdgeSource& src, MatchStats& stats,
                                                    HallFailure& failure) {
  const std::size_t n = g.vertex_count();
  if (left.size() != right.size()) {
    failure.witness = left;
    return std::nullopt;
  }
  constexpr std::uint32_t kAbsent = 0xFFFFFFFFu;
  std::vector<std::uint32_t> lpos(n, kAbsent), rpos(n, kAbsent);
  for (std::uint32_t i = 0; i < left.size(); ++i) lpos[left[i]] = i;
  for (std::uint32_t i = 0; i < right.size(); ++i) rpos[right[i]] = i;

  // One side's quota: window edges with the designated orientation, then top-up.
  auto collect = [&](Vertex v, bool is_left, std::size_t window, auto&& emit) {
    const auto& pos = is_left ? rpos : lpos;
    std::size_t got = 0;
    std::vector<const Incidence*> kept;
    auto usable = [&](const Incidence& inc) {
      if (inc.color != c || pos[inc.other] == kAbsent) return false;
      if (src.forbid && (is_left ? src.forbid(v, inc.other) : src.forbid(inc.other, v))) return false;
      return is_left ? forward_ok(g, inc) : backward_ok(g, inc);
    };
    auto preferred = [&](const Incidence& inc) { return !src.preferred || (*src.preferred)[inc.other]; };
    if (s && window) {
      for (const auto& inc : g.incident(v)) {
        if (got == src.quota) break;
        if (usable(inc) && preferred(inc) && inc.outgoing == is_left && in_window(*s, window, inc.step))
          kept.push_back(&inc), ++got;
      }
    }
    if (got < src.quota && !src.strict) {
      if (s && window) ++stats.topped_up;
      for (int round = 0; round < 2 && got < src.quota; ++round) {
        for (const auto& inc : g.incident(v)) {
          if (got == src.quota) break;
          if (!usable(inc) || (round == 0 && !preferred(inc))) continue;
          if (round == 1 && preferred(inc)) continue;
          if (std::find(kept.begin(), kept.end(), &inc) != kept.end()) continue;
          kept.push_back(&inc), ++got;
        }
        if (!src.preferred) break;
      }
    }
    for (const Incidence* inc : kept) emit(inc->other);
  };

  BipartiteGraph bg(left.size(), right.size());
  for (std::uint32_t i = 0; i < left.size(); ++i)
    collect(left[i], true, src.out_window, [&](Vertex w) { bg.add_edge(i, rpos[w]); });
  for (std::uint32_t i = 0; i < right.size(); ++i)
    collect(right[i], false, src.in_window, [&](Vertex u) { bg.add_edge(lpos[u], i); });
  auto m = hopcroft_karp(bg);

  if (m.size < left.size() && !src.strict) {
    ++stats.full_retries;
    BipartiteGraph full(left.size(), right.size());
    for (std::uint32_t i = 0; i < left.size(); ++i) {
      for (const auto& inc : g.incident(left[i])) {
        if (inc.color != c || rpos[inc.other] == kAbsent || !forward_ok(g, inc)) continue;
        if (src.forbid && src.forbid(left[i], inc.other)) continue;
        full.add_edge(i, rpos[inc.other]);
      }
    }
    bg = std::move(full);
    m = hopcroft_karp(bg);
  }
  if (m.size < left.size()) {
    failure.witness.clear();
    for (auto i : hall_violator(bg, m)) failure.witness.push_back(left[i]);
    std::sort(failure.witness.begin(), failure.witness.end());
    for (std::size_t i = 0; i < left.size(); ++i)
      if (m.left_mate[i] == kUnmatched) failure.unmatched.push_back(left[i]);
    for (std::size_t i = 0; i < right.size(); ++i)
      if (m.right_mate[i] == kUnmatched) failure.unmatched.push_back(right[i]);
    return std::nullopt;
  }
  std::vector<Vertex> mate(left.size());
  for (std::size_t i = 0; i < left.size(); ++i) mate[i] = right[m.left_mate[i]];
  return mate;
}

LayerMatchings layer_matchings(const ColoredGraph& g, const Pattern& p, const PipelineSetup* s,
                               const std::vector<std::vector<Vertex>>& layers, std::size_t quota,
                               bool strict) {
  LayerMatchings out;
  const std::size_t ell = layers.size();
  for (std::size_t i = 1; i < ell; ++i) {
    EdgeSource src;
    src.quota = quota;
    src.strict = strict;
    if (s) src.out_window = i, src.in_window = ell + i + 1;
    HallFailure fail;
    fail.stage = i;
    auto mate = perfect_matching(g, s, layers[i - 1], layers[i], p.at(i), src, out.stats, fail);
    if (!mate) {
      // keep going so the caller sees every unmatched vertex at once
      if (!out.failure) out.failure = std::move(fail);
      else out.failure->unmatched.insert(out.failure->unmatched.end(), fail.unmatched.begin(), fail.unmatched.end());
      mate.emplace();
    }
    out.mate.push_back(std::move(*mate));
  }
  if (out.failure) out.mate.clear();
  return out;
}

std::vector<CoverPath> chain_paths(const ColoredGraph& g, const std::vector<std::vector<Vertex>>& layers,
                                   const LayerMatchings& m) {
  const std::size_t ell = layers.size();
  std::vector<std::uint32_t> idx(g.vertex_count(), 0);
  for (const auto& l : layers)
    for (std::uint32_t k = 0; k < l.size(); ++k) idx[l[k]] = k;
  std::vector<CoverPath> out;
  if (ell == 0) return out;
  for (std::uint32_t k = 0; k < layers[0].size(); ++k) {
    CoverPath path;
    Vertex cur = layers[0][k];
    path.vertices.push_back(cur);
    for (std::size_t i = 1; i < ell; ++i) {
      const Vertex nxt = m.mate[i - 1][idx[cur]];
      path.colors.push_back(*g.edge_color(cur, nxt));
      path.vertices.push_back(nxt);
      cur = nxt;
    }
    out.push_back(std::move(path));
  }
  return out;
}

EndpointMatching endpoint_matching(const ColoredGraph& g, const Pattern& p, const PipelineSetup* s,
                                   const std::vector<CoverPath>& paths, const std::vector<char>& good,
                                   std::size_t quota, bool strict) {
  EndpointMatching out;
  const std::size_t ell = p.length();
  std::vector<Vertex> heads, tails;
  std::vector<std::size_t> tail_of(g.vertex_count(), paths.size());
  std::vector<char> preferred(g.vertex_count(), 0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    heads.push_back(paths[i].head());
    tails.push_back(paths[i].tail());
    tail_of[paths[i].tail()] = i;
    if (good[i]) preferred[paths[i].head()] = preferred[paths[i].tail()] = 1;
  }
  EdgeSource src;
  src.quota = quota;
  src.strict = strict;
  if (s) src.out_window = ell, src.in_window = ell + 1;
  src.preferred = &preferred;
  // closing a two-vertex undirected path on itself would reuse its only edge
  src.forbid = [&](Vertex h, Vertex t) {
    const std::size_t j = tail_of[t];
    return !g.directed() && paths[j].vertices.size() == 2 && paths[j].head() == h;
  };
  HallFailure fail;
  fail.stage = 0;
  auto mate = perfect_matching(g, s, heads, tails, p.at(ell), src, out.stats, fail);
  if (!mate) {
    out.failure = std::move(fail);
    return out;
  }
  out.succ.resize(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) out.succ[i] = tail_of[(*mate)[i]];
  return out;
}

TwoFactor assemble_two_factor(const std::vector<CoverPath>& paths, const std::vector<std::size_t>& succ,
                              std::size_t n) {
  TwoFactor f;
  std::vector<char> seen_path(paths.size(), 0);
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (seen_path[i]) continue;
    std::vector<Vertex> cyc;
    for (std::size_t j = i; !seen_path[j]; j = succ[j]) {
      seen_path[j] = 1;
      for (Vertex v : paths[j].vertices) {
        if (v >= n || seen[v]) throw std::logic_error("2-factor visits a vertex twice");
        seen[v] = 1;
        cyc.push_back(v);
      }
    }
    if (cyc.size() < 2) throw std::logic_error("2-factor has a degenerate cycle");
    f.cycles.push_back(std::move(cyc));
  }
  if (std::count(seen.begin(), seen.end(), 1) != static_cast<std::ptrdiff_t>(n))
    throw std::logic_error("2-factor does not span");
  f.permutation_cycles = f.cycles.size();
  return f;
}

namespace {

class Merger {
 public:
  Merger(const ColoredGraph& g, const Pattern& p, const std::vector<CoverPath>& paths, std::vector<std::size_t> succ,
         std::uint64_t budget, std::uint64_t seed)
      : n_(paths.size()), succ_(std::move(succ)), out_(n_), pos_(n_, kOff), budget_(budget), rng_(seed) {
    std::vector<std::size_t> tail_of(g.vertex_count(), n_);
    for (std::size_t i = 0; i < n_; ++i) tail_of[paths[i].tail()] = i;
    const Color c = p.at(p.length());
    for (std::size_t i = 0; i < n_; ++i) {
      for (const auto& inc : g.incident(paths[i].head())) {
        if (inc.color != c || !forward_ok(g, inc)) continue;
        const std::size_t j = tail_of[inc.other];
        if (j == n_) continue;
        if (j == i && !g.directed() && paths[i].vertices.size() == 2) continue;
        out_[i].push_back(j);
      }
      std::sort(out_[i].begin(), out_[i].end());
      out_[i].erase(std::unique(out_[i].begin(), out_[i].end()), out_[i].end());
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (!has_arc(i, succ_[i])) throw std::logic_error("initial factor uses a missing arc");
  }

  MergeResult run() {
    MergeResult res;
    label();
    res.cycles_before = cycles_;
    exchange_phase(res);
    while (cycles_ > 1 && budget_ > 0) {
      if (!merge_one(res)) break;
      label();
    }
    res.cycles_left = cycles_;
    if (cycles_ == 1) {
      std::size_t j = 0;
      do {
        res.order.push_back(j);
        j = succ_[j];
      } while (j != 0);
    }
    return res;
  }

 private:
  static constexpr std::size_t kOff = static_cast<std::size_t>(-1);

  bool has_arc(std::size_t a, std::size_t b) const {
    return std::binary_search(out_[a].begin(), out_[a].end(), b);
  }

  void label() {
    cyc_.assign(n_, kOff);
    size_.clear();
    cycles_ = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (cyc_[i] != kOff) continue;
      std::size_t k = 0;
      for (std::size_t j = i; cyc_[j] == kOff; j = succ_[j]) cyc_[j] = cycles_, ++k;
      size_.push_back(k);
      ++cycles_;
    }
    pred_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) pred_[succ_[i]] = i;
  }

  // a -> y and b -> succ(a) replace a -> succ(a) and b -> y, for y = succ(b) on another cycle.
  void exchange_phase(MergeResult& res) {
    std::vector<std::vector<std::size_t>> members(cycles_);
    for (std::size_t i = 0; i < n_; ++i) members[cyc_[i]].push_back(i);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t y : out_[a]) {
          if (cyc_[y] == cyc_[a]) continue;
          const std::size_t b = pred_[y], sa = succ_[a];
          if (!has_arc(b, sa)) continue;
          succ_[a] = y, pred_[y] = a;
          succ_[b] = sa, pred_[sa] = b;
          std::size_t keep = cyc_[a], gone = cyc_[y];
          if (members[keep].size() < members[gone].size()) std::swap(keep, gone);
          for (std::size_t x : members[gone]) cyc_[x] = keep;
          members[keep].insert(members[keep].end(), members[gone].begin(), members[gone].end());
          members[gone].clear();
          --cycles_;
          ++res.exchanges;
          changed = true;
          break;
        }
      }
    }
    label();
  }

  void append_cycle(std::size_t from) {
    std::size_t j = from;
    do {
      pos_[j] = path_.size();
      path_.push_back(j);
      j = succ_[j];
    } while (j != from);
  }

  // Opens the largest cycle and one neighbor cycle into a path, then rotates the far
  // end until it closes back to the start.
  bool merge_one(MergeResult& res) {
    std::size_t big = 0;
    for (std::size_t c = 1; c < cycles_; ++c)
      if (size_[c] > size_[big]) big = c;
    for (std::size_t x = 0; x < n_; ++x) {
      if (cyc_[x] != big) continue;
      for (std::size_t y : out_[x]) {
        if (cyc_[y] == big) continue;
        if (try_close(succ_[x], y, res)) return true;
        if (budget_ == 0) return false;
      }
    }
    for (std::size_t y = 0; y < n_; ++y) {
      if (cyc_[y] == big) continue;
      for (std::size_t x : out_[y]) {
        if (cyc_[x] != big) continue;
        if (try_close(succ_[y], x, res)) return true;
        if (budget_ == 0) return false;
      }
    }
    return false;
  }

  // Path: the cycle of `start` from start round to its predecessor, then the cycle of
  // `joint` from joint round to its predecessor.
  bool try_close(std::size_t start, std::size_t joint, MergeResult& res) {
    for (std::size_t j : path_) pos_[j] = kOff;
    path_.clear();
    append_cycle(start);
    append_cycle(joint);
    std::uint64_t local = std::min<std::uint64_t>(budget_, 50 * path_.size() + 1000);
    std::vector<std::pair<std::size_t, std::size_t>> moves;
    while (true) {
      const std::size_t e = path_.back(), s = path_.front();
      if (has_arc(e, s)) {
        for (std::size_t k = 0; k + 1 < path_.size(); ++k) succ_[path_[k]] = path_[k + 1];
        succ_[e] = s;
        return true;
      }
      bool extended = false;
      for (std::size_t z : out_[e]) {
        if (pos_[z] == kOff) {
          append_cycle(z);
          extended = true;
          break;
        }
      }
      if (extended) continue;
      if (local == 0 || budget_ == 0) return false;
      // double rotation: e -> p_i and p_{i-1} -> p_j with i < j
      moves.clear();
      std::size_t best = moves.max_size();
      const std::size_t k = path_.size() - 1;
      for (std::size_t pi : out_[e]) {
        const std::size_t i = pos_[pi];
        if (i == kOff || i == 0 || i >= k) continue;
        for (std::size_t pj : out_[path_[i - 1]]) {
          const std::size_t j = pos_[pj];
          if (j == kOff || j <= i || j > k) continue;
          moves.emplace_back(i, j);
          const std::size_t end = path_[j - 1];
          if (best == moves.max_size() && (has_arc(end, s) || open_neighbor(end))) best = moves.size() - 1;
        }
      }
      if (moves.empty()) return false;
      const auto [i, j] = moves[best != moves.max_size() ? best : bounded(rng_, moves.size())];
      std::vector<std::size_t> next(path_.begin(), path_.begin() + static_cast<std::ptrdiff_t>(i));
      next.insert(next.end(), path_.begin() + static_cast<std::ptrdiff_t>(j), path_.end());
      next.insert(next.end(), path_.begin() + static_cast<std::ptrdiff_t>(i),
                  path_.begin() + static_cast<std::ptrdiff_t>(j));
      path_ = std::move(next);
      for (std::size_t q = i; q < path_.size(); ++q) pos_[path_[q]] = q;
      --local, --budget_;
      ++res.rotations;
    }
  }

  bool open_neighbor(std::size_t v) const {
    for (std::size_t z : out_[v])
      if (pos_[z] == kOff) return true;
    return false;
  }

  std::size_t n_;
  std::vector<std::size_t> succ_, pred_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::size_t> cyc_, size_;
  std::size_t cycles_ = 0;
  std::vector<std::size_t> path_, pos_;
  std::uint64_t budget_;
  Xoshiro256 rng_;
};

}  // namespace

MergeResult merge_cycles(const ColoredGraph& g, const Pattern& p, const std::vector<CoverPath>& paths,
                         std::vector<std::size_t> succ, std::uint64_t budget, std::uint64_t seed) {
  if (paths.empty()) return {};
  auto res = Merger(g, p, paths, std::move(succ), budget, seed).run();
  if (!res.order.empty()) {
    std::vector<Vertex> cyc;
    for (std::size_t j : res.order) cyc.insert(cyc.end(), paths[j].vertices.begin(), paths[j].vertices.end());
    res.cycle = std::move(cyc);
  }
  return res;
}

PipelineResult run_pipeline(const ColoredProcess& proc, const Pattern& p, const PipelineConfig& cfg) {
  PipelineResult r;
  PipelineConfig c = cfg;
  if (!c.reference_time) {
    auto fit = tau_fit(proc, p);
    if (!fit) {
      r.failure = "the pattern never fits this process";
      return r;
    }
    c.reference_time = fit;
  }
  const PipelineSetup s = prepare_pipeline(proc, p, c);
  r.reference = s.reference;
  r.eps = s.eps, r.beta = s.beta, r.bad_threshold = s.bad_threshold;
  const ColoredGraph g = snapshot(proc, s.reference);
  const std::size_t n = s.n, ell = s.ell;

  r.stage = Stage::Classify;
  const auto cls = classify_bad(g, p, s, c.strict_windows);
  r.bad = cls.bad_count, r.tbad = cls.tbad_count, r.max_bad_degree = cls.max_bad_degree;
  std::vector<char> bad = cls.bad;

  // v can sit in layer `to` when it has a forward and a backward edge into the
  // neighboring layers among vertices no cover path uses
  std::vector<char> used;
  std::vector<std::uint32_t> layer = s.layer;
  auto placeable = [&](Vertex v, std::uint32_t to) {
    bool f = false, b = false;
    const std::uint32_t next = (to + 1) % ell, prev = (to + ell - 1) % ell;
    for (const auto& inc : g.incident(v)) {
      if (used[inc.other]) continue;
      f |= inc.color == p.phase(to) && layer[inc.other] == next && forward_ok(g, inc);
      b |= inc.color == p.phase(prev) && layer[inc.other] == prev && backward_ok(g, inc);
    }
    return f && b;
  };
  std::vector<char> no_end(n, 0);
  std::vector<std::size_t> hops(n, 0);
  auto mark = [&](const std::vector<Vertex>& vs, bool endpoint_failed) {
    for (Vertex v : vs) {
      r.reclassified += !bad[v], bad[v] = 1;
      if (endpoint_failed) no_end[v] = 1;
    }
  };

  std::vector<CoverPath> paths;
  std::vector<char> good;
  EndpointMatching em;
  for (std::size_t round = 1;; ++round) {
    r.rounds = round;
    if (round > kPipelineRounds) {
      r.failure = "no stable cover after " + std::to_string(kPipelineRounds) + " rounds";
      return r;
    }
    r.stage = Stage::Cover;
    auto cover = cover_bad(g, p, bad, c.corrected_stopping, &layer, &no_end);
    if (cover.broke) {
      r.failure = "cover breaks at step " + std::to_string(cover.broke->step);
      r.witness = {cover.broke->vertex};
      return r;
    }
    r.bad_path_lengths.clear();
    for (const auto& path : cover.paths) {
      r.bad_path_lengths.push_back(path.colors.size());
      if (pi_path_offset(path.colors, p) != std::size_t{0} || path.colors.size() % ell != ell - 1) {
        r.failure = "cover path does not run Pi_1 .. Pi_{ell-1}";
        r.witness = {path.covered};
        return r;
      }
    }
    r.bad_paths = cover.paths.size();
    used = cover.used;
    if (!c.strict_windows) {
      // a stranded vertex first tries another layer; moves can strand neighbors, so repeat
      std::vector<Vertex> stranded;
      for (int pass = 0; pass < 4; ++pass) {
        stranded.clear();
        for (Vertex v = 0; v < n; ++v)
          if (!used[v] && !placeable(v, layer[v])) stranded.push_back(v);
        bool moved = false;
        for (Vertex v : stranded) {
          for (std::uint32_t to = 0; to < ell; ++to) {
            if (to != layer[v] && placeable(v, to)) {
              layer[v] = to, moved = true, ++r.relocated;
              break;
            }
          }
        }
        if (!moved) break;
      }
      stranded.erase(std::remove_if(stranded.begin(), stranded.end(),
                                    [&](Vertex v) { return placeable(v, layer[v]); }),
                     stranded.end());
      if (!stranded.empty()) {
        mark(stranded, false);
        continue;
      }
    }

    r.stage = Stage::Rebalance;
    std::vector<std::vector<Vertex>> layers(ell);
    for (Vertex v = 0; v < n; ++v)
      if (!used[v]) layers[layer[v]].push_back(v);
    auto balanced = rebalance(std::move(layers), mix_seed(c.seed, round), placeable);
    r.moved = balanced.moves.size();

    r.stage = Stage::Matchings;
    auto lm = layer_matchings(g, p, &s, balanced.layers, c.quota, c.strict_windows);
    r.matching.topped_up += lm.stats.topped_up;
    r.matching.full_retries += lm.stats.full_retries;
    if (lm.failure) {
      if (c.strict_windows || lm.failure->unmatched.empty()) {
        r.failure = "no perfect matching between layers " + std::to_string(lm.failure->stage) + " and " +
                    std::to_string(lm.failure->stage + 1);
        r.witness = lm.failure->witness;
        return r;
      }
      std::vector<Vertex> rest;
      for (Vertex v : lm.failure->unmatched) {
        bool moved = false;
        if (hops[v] < ell)
          for (std::uint32_t k = 1; k < ell && !moved; ++k) {
            const std::uint32_t to = static_cast<std::uint32_t>((layer[v] + k) % ell);
            if (placeable(v, to)) layer[v] = to, moved = true, ++hops[v], ++r.relocated;
          }
        if (!moved) rest.push_back(v);
      }
      mark(rest, false);
      continue;
    }
    paths = std::move(cover.paths);
    good.assign(paths.size(), 0);
    auto chains = chain_paths(g, balanced.layers, lm);
    r.good_paths = chains.size();
    for (auto& path : chains) paths.push_back(std::move(path)), good.push_back(1);

    r.stage = Stage::Endpoints;
    em = endpoint_matching(g, p, &s, paths, good, c.quota, c.strict_windows);
    r.matching.topped_up += em.stats.topped_up;
    r.matching.full_retries += em.stats.full_retries;
    if (em.failure) {
      if (c.strict_windows || em.failure->unmatched.empty()) {
        r.failure = "no perfect matching from heads to tails";
        r.witness = em.failure->witness;
        return r;
      }
      mark(em.failure->unmatched, true);
      continue;
    }
    break;
  }
  r.permutation = em.succ;

  r.stage = Stage::TwoFactor;
  auto factor = assemble_two_factor(paths, em.succ, n);
  r.permutation_cycles = factor.permutation_cycles;
  for (const auto& cyc : factor.cycles) {
    std::vector<Color> cols;
    for (std::size_t k = 0; k < cyc.size(); ++k) cols.push_back(*g.edge_color(cyc[k], cyc[(k + 1) % cyc.size()]));
    if (!is_pi_cycle(cols, p)) throw std::logic_error("2-factor cycle is not Pi-colored");
  }

  r.stage = Stage::Merge;
  auto merged = merge_cycles(g, p, paths, em.succ, c.merge_budget, mix_seed(c.seed, 2));
  r.exchanges = merged.exchanges, r.rotations = merged.rotations;
  if (!merged.cycle) {
    r.failure = std::to_string(merged.cycles_left) + " cycles left after merging";
    return r;
  }
  auto verdict = verify_pi_hamilton(g, p, *merged.cycle);
  if (!verdict) throw std::logic_error("pipeline cycle fails verification: " + verdict.reason);
  r.cycle = std::move(*merged.cycle);
  r.stage = Stage::Done;
  r.success = true;
  return r;
}

}  // namespace patternham
