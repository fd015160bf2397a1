#include "patternham/router.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "patternham/constructive.hpp"
#include "patternham/rng.hpp"

namespace patternham {

const char* to_string(BuildStage s) noexcept {
  switch (s) {
    case BuildStage::Precondition: return "precondition";
    case BuildStage::Padding: return "padding";
    case BuildStage::Spikes: return "spikes";
    case BuildStage::Rebalance: return "rebalance";
    case BuildStage::Matchings: return "matchings";
    case BuildStage::Endpoints: return "endpoints";
    case BuildStage::Merge: return "merge";
  }
  return "?";
}

namespace {

constexpr std::size_t kSpikeRestarts = 16;

std::size_t enter_class(std::uint32_t k, std::size_t ell) { return (k + ell - 1) % ell; }
std::size_t exit_class(std::uint32_t k, std::size_t ell, bool directed) { return (k + (directed ? 3 : 2)) % ell; }

// Spikes for every vertex of B, all spike vertices distinct. Hubs and bases avoid B;
// bases avoid `no_base`. Returns the vertex that could not be given a spike on failure.
class SpikeFinder {
 public:
  SpikeFinder(const ColoredGraph& g, const Pattern& p, const std::vector<char>& in_b,
              const std::vector<char>& no_base)
      : g_(g), p_(p), ell_(p.length()), in_b_(in_b), no_base_(no_base) {}

  std::vector<Spike> run(Vertex& broke) {
    std::vector<Vertex> first;
    while (true) {
      auto spikes = once(first, broke);
      if (broke == kNoVertex) return spikes;
      if (first.size() >= kSpikeRestarts || std::find(first.begin(), first.end(), broke) != first.end()) return {};
      first.insert(first.begin(), broke);
    }
  }

 private:
  bool free(Vertex x) const { return !in_b_[x] && !used_[x]; }
  bool base_ok(Vertex x) const { return free(x) && !no_base_[x]; }
  Color ph(std::size_t k) const { return p_.phase(k % ell_); }

  // a neighbor of `from` joined by color c, walked out of `from` (or into it)
  template <typename Ok>
  Vertex neighbor(Vertex from, Color c, bool out, Ok ok, Vertex skip = kNoVertex) const {
    for (const auto& inc : g_.incident(from)) {
      if (inc.color != c || inc.other == skip || !ok(inc.other)) continue;
      if (g_.directed() && inc.outgoing != out) continue;
      return inc.other;
    }
    return kNoVertex;
  }

  std::optional<Spike> attach(Vertex v) const {
    auto is_base = [&](Vertex x) { return base_ok(x); };
    for (const auto& inc : g_.incident(v)) {
      const Vertex h = inc.other;
      if (!free(h)) continue;
      for (std::uint32_t k = 0; k < ell_; ++k) {
        if (!g_.directed()) {
          if (ph(k) != inc.color) continue;
          const Vertex enter = neighbor(h, ph(k + ell_ - 1), false, is_base);
          if (enter == kNoVertex) continue;
          const Vertex exit = neighbor(h, ph(k + 1), true, is_base, enter);
          if (exit == kNoVertex) continue;
          return Spike{v, h, h, enter, exit, k};
        }
        // directed: h is the in-hub, h -> v
        if (inc.outgoing || ph(k) != inc.color) continue;
        const Vertex enter = neighbor(h, ph(k + ell_ - 1), false, is_base);
        if (enter == kNoVertex) continue;
        for (const auto& o : g_.incident(v)) {
          if (!o.outgoing || o.color != ph(k + 1) || !free(o.other) || o.other == h || o.other == enter) continue;
          const Vertex a = o.other;
          for (const auto& e : g_.incident(a)) {
            if (!e.outgoing || e.color != ph(k + 2) || !base_ok(e.other)) continue;
            if (e.other == h || e.other == enter) continue;
            return Spike{v, h, a, enter, e.other, k};
          }
        }
      }
    }
    return std::nullopt;
  }

  int options(Vertex v) const {
    int k = 0;
    for (const auto& inc : g_.incident(v)) k += free(inc.other);
    return k;
  }

  std::vector<Spike> once(const std::vector<Vertex>& first, Vertex& broke) {
    const std::size_t n = g_.vertex_count();
    used_.assign(n, 0);
    broke = kNoVertex;
    std::vector<Vertex> order;
    for (Vertex v = 0; v < n; ++v)
      if (in_b_[v]) order.push_back(v);
    std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return options(a) < options(b); });
    for (auto it = first.rbegin(); it != first.rend(); ++it) {
      auto at = std::find(order.begin(), order.end(), *it);
      if (at != order.end()) std::rotate(order.begin(), at, at + 1);
    }
    std::vector<Spike> out;
    for (Vertex v : order) {
      auto s = attach(v);
      if (!s) {
        broke = v;
        return out;
      }
      for (Vertex x : {s->in_hub, s->out_hub, s->enter, s->exit}) used_[x] = 1;
      out.push_back(*s);
    }
    return out;
  }

  const ColoredGraph& g_;
  const Pattern& p_;
  std::size_t ell_;
  const std::vector<char>& in_b_;
  const std::vector<char>& no_base_;
  std::vector<char> used_;
};

struct Seq {
  std::vector<Vertex> v;
  std::vector<Color> c;
};

Seq leave(const ConnectivityCertificate& cert, Vertex x) {
  if (cert.on_cycle(x)) return {{x}, {}};
  const Spike& s = cert.spikes[cert.spike_of[x]];
  const Pattern& p = cert.pattern;
  const std::size_t k = s.k;
  if (!cert.directed) {
    if (x == s.head) return {{s.head, s.in_hub, s.exit}, {p.phase(k), p.phase(k + 1)}};
    return {{s.in_hub, s.exit}, {p.phase(k + 1)}};
  }
  if (x == s.head) return {{s.head, s.out_hub, s.exit}, {p.phase(k + 1), p.phase(k + 2)}};
  if (x == s.out_hub) return {{s.out_hub, s.exit}, {p.phase(k + 2)}};
  return {{s.in_hub, s.head, s.out_hub, s.exit}, {p.phase(k), p.phase(k + 1), p.phase(k + 2)}};
}

Seq arrive(const ConnectivityCertificate& cert, Vertex x) {
  if (cert.on_cycle(x)) return {{x}, {}};
  const Spike& s = cert.spikes[cert.spike_of[x]];
  const Pattern& p = cert.pattern;
  const std::size_t k = s.k, back = k + p.length() - 1;
  if (!cert.directed) {
    if (x == s.head) return {{s.enter, s.in_hub, s.head}, {p.phase(back), p.phase(k)}};
    return {{s.enter, s.in_hub}, {p.phase(back)}};
  }
  if (x == s.head) return {{s.enter, s.in_hub, s.head}, {p.phase(back), p.phase(k)}};
  if (x == s.in_hub) return {{s.enter, s.in_hub}, {p.phase(back)}};
  return {{s.enter, s.in_hub, s.head, s.out_hub}, {p.phase(back), p.phase(k), p.phase(k + 1)}};
}

bool forward_ok(const ColoredGraph& g, const Incidence& inc) { return !g.directed() || inc.outgoing; }
bool backward_ok(const ColoredGraph& g, const Incidence& inc) { return !g.directed() || !inc.outgoing; }

}  // namespace

CertificateBuild build_certificate(const ColoredProcess& proc, const Pattern& p, Step t, const RouterConfig& cfg) {
  CertificateBuild out;
  auto fail = [&](BuildStage st, std::string why, std::vector<Vertex> w = {}) {
    out.failure = BuildFailure{st, std::move(why), std::move(w)};
    return out;
  };
  const std::size_t n = proc.n, ell = p.length();
  if (p.palette() != proc.r) throw ConfigError("pattern palette differs from the process palette");
  if (t > proc.length()) throw ConfigError("time beyond the process");
  if (cfg.quota < 1) throw ConfigError("quota must be positive");
  if (ell < 2) return fail(BuildStage::Precondition, "routing needs a pattern of length at least 2");
  const ColoredGraph g = snapshot(proc, t);
  for (Vertex v = 0; v < n; ++v) {
    const bool lonely = g.directed() ? (g.in_degree(v) == 0 || g.out_degree(v) == 0) : g.degree(v) == 0;
    if (lonely) return fail(BuildStage::Precondition, "vertex without edges", {v});
  }

  PipelineSetup s;
  s.n = n;
  s.ell = ell;
  s.demand = g.directed() ? directed_demand(p).demand : demand(p).demand;
  s.bad_threshold = cfg.bad_threshold.value_or(0.0);
  s.tbad_threshold = n > 2 ? std::log(std::log(static_cast<double>(n))) : 0.0;
  s.reference = t;
  s.layer.resize(n);
  for (Vertex v = 0; v < n; ++v)
    s.layer[v] = static_cast<std::uint32_t>(cfg.interleaved_layers ? v % ell : (std::size_t{v} * ell) / n);
  const auto cls = classify_bad(g, p, s, false);
  std::vector<char> bad = cls.bad;
  std::vector<char> no_base(n, 0);
  std::vector<std::size_t> hops(n, 0);
  std::vector<std::uint32_t> cls_of = s.layer;
  const std::size_t per_spike = g.directed() ? 3 : 2;

  // before any spike: a bad vertex with both class edges in another class moves there
  std::size_t relocated = 0;
  {
    auto fits_class = [&](Vertex v, std::uint32_t a) {
      bool f = false, b = false;
      const auto next = static_cast<std::uint32_t>((a + 1) % ell), prev = static_cast<std::uint32_t>((a + ell - 1) % ell);
      for (const auto& inc : g.incident(v)) {
        if (bad[inc.other]) continue;
        f |= inc.color == p.phase(a) && cls_of[inc.other] == next && forward_ok(g, inc);
        b |= inc.color == p.phase(prev) && cls_of[inc.other] == prev && backward_ok(g, inc);
      }
      return f && b;
    };
    for (bool changed = true; changed;) {
      changed = false;
      for (Vertex v = 0; v < n; ++v) {
        if (!bad[v]) continue;
        for (std::uint32_t a = 0; a < ell; ++a) {
          if (fits_class(v, a)) {
            cls_of[v] = a, bad[v] = 0, changed = true, ++relocated;
            break;
          }
        }
      }
    }
  }

  for (std::size_t round = 1; round <= kPipelineRounds; ++round) {
    out.rounds = round;
    // pad B so the cycle classes can be equal
    const std::size_t nb = static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
    std::optional<std::size_t> h;
    for (std::size_t i = 0; i < ell && !h; ++i)
      if (per_spike * (nb + i) < n && (n - per_spike * (nb + i)) % ell == 0) h = i;
    if (!h) return fail(BuildStage::Padding, "no padding makes the cycle length a multiple of ell");
    std::vector<Vertex> pool;
    for (Vertex v = 0; v < n; ++v) {
      if (bad[v]) continue;
      bool near = false;
      for (const auto& inc : g.incident(v)) near |= bad[inc.other] != 0;
      if (!near) pool.push_back(v);
    }
    if (pool.size() < *h) return fail(BuildStage::Padding, "too few good vertices away from BAD");
    Xoshiro256 rng(mix_seed(cfg.seed, round));
    for (std::size_t i = 0; i < *h; ++i) std::swap(pool[i], pool[i + bounded(rng, pool.size() - i)]);
    std::vector<char> in_b = bad;
    for (std::size_t i = 0; i < *h; ++i) in_b[pool[i]] = 1;

    Vertex broke = kNoVertex;
    auto spikes = SpikeFinder(g, p, in_b, no_base).run(broke);
    if (broke != kNoVertex) return fail(BuildStage::Spikes, "no spike for a vertex", {broke});

    std::vector<char> cyc(n, 1), forced(n, 0);
    for (const auto& sp : spikes) {
      cyc[sp.head] = cyc[sp.in_hub] = cyc[sp.out_hub] = 0;
      forced[sp.enter] = forced[sp.exit] = 1;
      cls_of[sp.enter] = static_cast<std::uint32_t>(enter_class(sp.k, ell));
      cls_of[sp.exit] = static_cast<std::uint32_t>(exit_class(sp.k, ell, g.directed()));
    }
    const std::size_t on = n - per_spike * spikes.size(), target = on / ell;

    auto placeable = [&](Vertex v, std::uint32_t a) {
      bool f = false, b = false;
      const std::uint32_t next = static_cast<std::uint32_t>((a + 1) % ell), prev = static_cast<std::uint32_t>((a + ell - 1) % ell);
      for (const auto& inc : g.incident(v)) {
        if (!cyc[inc.other]) continue;
        f |= inc.color == p.phase(a) && cls_of[inc.other] == next && forward_ok(g, inc);
        b |= inc.color == p.phase(prev) && cls_of[inc.other] == prev && backward_ok(g, inc);
      }
      return f && b;
    };
    // unplaceable vertices move class when they can; the rest get spikes next round
    std::vector<Vertex> stranded;
    for (int pass = 0; pass < 4; ++pass) {
      stranded.clear();
      for (Vertex v = 0; v < n; ++v)
        if (cyc[v] && !placeable(v, cls_of[v])) stranded.push_back(v);
      bool moved = false;
      for (Vertex v : stranded) {
        if (forced[v]) continue;
        for (std::uint32_t a = 0; a < ell; ++a) {
          if (a != cls_of[v] && placeable(v, a)) {
            cls_of[v] = a, moved = true;
            break;
          }
        }
      }
      if (!moved) break;
    }
    std::erase_if(stranded, [&](Vertex v) { return placeable(v, cls_of[v]); });
    if (!stranded.empty()) {
      for (Vertex v : stranded) (forced[v] ? no_base : bad)[v] = 1;
      continue;
    }

    std::vector<std::vector<Vertex>> layers(ell);
    std::vector<std::size_t> fixed(ell, 0);
    for (Vertex v = 0; v < n; ++v) {
      if (!cyc[v]) continue;
      layers[cls_of[v]].push_back(v);
      fixed[cls_of[v]] += forced[v];
    }
    for (std::size_t a = 0; a < ell; ++a)
      if (fixed[a] > target) return fail(BuildStage::Rebalance, "more bases in one class than the class holds");
    std::vector<Vertex> cands;
    for (std::uint32_t to = 0; to < ell; ++to) {
      while (layers[to].size() < target) {
        std::uint32_t from = 0;
        for (std::uint32_t a = 1; a < ell; ++a)
          if (layers[a].size() > layers[from].size()) from = a;
        auto& src = layers[from];
        cands.clear();
        for (std::size_t i = 0; i < src.size(); ++i)
          if (!forced[src[i]] && placeable(src[i], to)) cands.push_back(static_cast<Vertex>(i));
        if (cands.empty())
          for (std::size_t i = 0; i < src.size(); ++i)
            if (!forced[src[i]]) cands.push_back(static_cast<Vertex>(i));
        if (cands.empty()) return fail(BuildStage::Rebalance, "no movable vertex");
        const std::size_t at = cands[bounded(rng, cands.size())];
        const Vertex v = src[at];
        src.erase(src.begin() + static_cast<std::ptrdiff_t>(at));
        cls_of[v] = to;
        layers[to].push_back(v);
      }
    }

    auto repair = [&](const std::vector<Vertex>& unmatched) {
      for (Vertex v : unmatched) {
        bool moved = false;
        if (!forced[v] && hops[v] < ell)
          for (std::uint32_t d = 1; d < ell && !moved; ++d) {
            const auto a = static_cast<std::uint32_t>((cls_of[v] + d) % ell);
            if (placeable(v, a)) cls_of[v] = a, moved = true, ++hops[v];
          }
        if (!moved) (forced[v] ? no_base : bad)[v] = 1;
      }
    };
    auto lm = layer_matchings(g, p, nullptr, layers, cfg.quota, false);
    if (lm.failure) {
      if (lm.failure->unmatched.empty())
        return fail(BuildStage::Matchings, "no perfect matching between classes", lm.failure->witness);
      repair(lm.failure->unmatched);
      continue;
    }
    auto paths = chain_paths(g, layers, lm);
    const std::vector<char> good(paths.size(), 1);
    auto em = endpoint_matching(g, p, nullptr, paths, good, cfg.quota, false);
    if (em.failure) {
      if (em.failure->unmatched.empty())
        return fail(BuildStage::Endpoints, "no perfect matching from heads to tails", em.failure->witness);
      repair(em.failure->unmatched);
      continue;
    }
    auto merged = merge_cycles(g, p, paths, em.succ, cfg.merge_budget, mix_seed(cfg.seed, 1000 + round));
    if (!merged.cycle)
      return fail(BuildStage::Merge, std::to_string(merged.cycles_left) + " cycles left after merging");

    ConnectivityCertificate cert;
    cert.n = n;
    cert.pattern = p;
    cert.directed = g.directed();
    cert.t = t;
    cert.cycle = std::move(*merged.cycle);
    cert.position.assign(n, ConnectivityCertificate::kOffCycle);
    cert.spike_of.assign(n, ConnectivityCertificate::kOffCycle);
    for (std::size_t k = 0; k < cert.cycle.size(); ++k) {
      cert.position[cert.cycle[k]] = k;
      cert.colors.push_back(*g.edge_color(cert.cycle[k], cert.cycle[(k + 1) % cert.cycle.size()]));
    }
    for (std::size_t i = 0; i < spikes.size(); ++i)
      for (Vertex x : {spikes[i].head, spikes[i].in_hub, spikes[i].out_hub}) cert.spike_of[x] = i;
    cert.spikes = std::move(spikes);
    cert.bad = cls.bad_count;
    cert.relocated = relocated;
    cert.added = nb + relocated - cls.bad_count;
    cert.padding = *h;
    auto verdict = verify_certificate(cert, g, p, 100, cfg.seed);
    if (!verdict) throw std::logic_error("certificate fails verification: " + verdict.reason);
    out.certificate = std::move(cert);
    return out;
  }
  return fail(BuildStage::Matchings, "no stable classes after " + std::to_string(kPipelineRounds) + " rounds");
}

PiPath route(const ConnectivityCertificate& cert, Vertex u, Vertex v) {
  if (u >= cert.n || v >= cert.n) throw ConfigError("vertex out of range");
  if (u == v) throw ConfigError("route endpoints must differ");
  PiPath out;
  Seq from = leave(cert, u);
  Seq to = arrive(cert, v);
  if (auto it = std::find(from.v.begin(), from.v.end(), v); it != from.v.end()) {
    const auto len = it - from.v.begin();
    out.vertices.assign(from.v.begin(), it + 1);
    out.colors.assign(from.c.begin(), from.c.begin() + len);
  } else if (auto jt = std::find(to.v.begin(), to.v.end(), u); jt != to.v.end()) {
    const auto at = jt - to.v.begin();
    out.vertices.assign(jt, to.v.end());
    out.colors.assign(to.c.begin() + at, to.c.end());
  } else {
    out.vertices = std::move(from.v);
    out.colors = std::move(from.c);
    const std::size_t len = cert.cycle.size();
    for (std::size_t k = cert.position[out.vertices.back()], end = cert.position[to.v.front()]; k != end;) {
      out.colors.push_back(cert.colors[k]);
      k = (k + 1) % len;
      out.vertices.push_back(cert.cycle[k]);
    }
    out.vertices.insert(out.vertices.end(), to.v.begin() + 1, to.v.end());
    out.colors.insert(out.colors.end(), to.c.begin(), to.c.end());
  }
  auto off = pi_path_offset(out.colors, cert.pattern);
  if (!off || out.colors.size() > cert.cycle.size() + 4 * cert.pattern.length())
    throw std::logic_error("routed path breaks the pattern");
  out.offset = *off;
  return out;
}

Verdict verify_certificate(const ConnectivityCertificate& cert, const ColoredGraph& g, const Pattern& p,
                           std::size_t pairs, std::uint64_t seed) {
  const std::size_t n = g.vertex_count(), ell = p.length();
  if (cert.n != n) return Verdict::fail("vertex count differs");
  if (!(cert.pattern == p)) return Verdict::fail("pattern differs");
  if (cert.directed != g.directed()) return Verdict::fail("direction differs");
  if (cert.position.size() != n || cert.spike_of.size() != n) return Verdict::fail("index tables have the wrong size");
  const std::size_t len = cert.cycle.size();
  if (len == 0 || len % ell != 0 || cert.colors.size() != len) return Verdict::fail("cycle length is not a multiple of ell");
  std::vector<int> role(n, 0);
  for (std::size_t k = 0; k < len; ++k) {
    const Vertex x = cert.cycle[k], y = cert.cycle[(k + 1) % len];
    if (x >= n || role[x]++) return Verdict::fail("cycle repeats a vertex");
    if (cert.position[x] != k) return Verdict::fail("position table disagrees with the cycle");
    if (cert.colors[k] != p.phase(k) || !g.traversable(x, y, cert.colors[k]))
      return Verdict::fail("cycle edge " + std::to_string(x + 1) + "-" + std::to_string(y + 1) + " missing or off pattern");
  }
  if (!is_pi_cycle(cert.colors, p)) return Verdict::fail("cycle is not Pi-colored");

  auto on = [&](Vertex x) { return x < n && cert.position[x] != ConnectivityCertificate::kOffCycle; };
  auto edge = [&](Vertex a, Vertex b, std::size_t phase) { return g.traversable(a, b, p.phase(phase)); };
  for (std::size_t i = 0; i < cert.spikes.size(); ++i) {
    const Spike& s = cert.spikes[i];
    const std::size_t k = s.k, back = k + ell - 1;
    std::vector<Vertex> off{s.head, s.in_hub};
    if (cert.directed) off.push_back(s.out_hub);
    else if (s.in_hub != s.out_hub) return Verdict::fail("undirected spike with two hubs");
    for (Vertex x : off) {
      if (x >= n || on(x) || role[x]++) return Verdict::fail("spike vertex on the cycle or shared");
      if (cert.spike_of[x] != i) return Verdict::fail("spike table disagrees with the spikes");
    }
    if (!on(s.enter) || !on(s.exit)) return Verdict::fail("spike base off the cycle");
    if (cert.position[s.enter] % ell != enter_class(s.k, ell) ||
        cert.position[s.exit] % ell != exit_class(s.k, ell, cert.directed))
      return Verdict::fail("spike base in the wrong class");
    const bool edges = cert.directed ? edge(s.in_hub, s.head, k) && edge(s.enter, s.in_hub, back) &&
                                           edge(s.head, s.out_hub, k + 1) && edge(s.out_hub, s.exit, k + 2)
                                     : edge(s.head, s.in_hub, k) && edge(s.enter, s.in_hub, back) &&
                                           edge(s.in_hub, s.exit, k + 1);
    if (!edges) return Verdict::fail("spike edge of vertex " + std::to_string(s.head + 1) + " missing or miscolored");
  }
  for (Vertex x = 0; x < n; ++x)
    if (role[x] != 1) return Verdict::fail("vertex " + std::to_string(x + 1) + " neither on the cycle nor in one spike");

  if (n < 2) return {};
  Xoshiro256 rng(seed);
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto u = static_cast<Vertex>(bounded(rng, n));
    auto v = static_cast<Vertex>(bounded(rng, n - 1));
    if (v >= u) ++v;
    PiPath path;
    try {
      path = route(cert, u, v);
    } catch (const std::logic_error& e) {
      return Verdict::fail(e.what());
    }
    if (path.vertices.front() != u || path.vertices.back() != v) return Verdict::fail("route has the wrong ends");
    std::vector<char> seen(n, 0);
    for (Vertex x : path.vertices)
      if (seen[x]++) return Verdict::fail("route repeats a vertex");
    for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k)
      if (!g.traversable(path.vertices[k], path.vertices[k + 1], path.colors[k]))
        return Verdict::fail("route uses an edge the graph lacks");
    if (!pi_path_offset(path.colors, p)) return Verdict::fail("route is not Pi-colored");
    if (path.colors.size() > len + 4 * ell) return Verdict::fail("route longer than |C| + 4 ell");
  }
  return {};
}

}  // namespace patternham
