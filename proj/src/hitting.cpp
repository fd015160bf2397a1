#include "patternham/hitting.hpp"

#include <algorithm>

namespace patternham {

const char* to_string(Resolution r) noexcept {
  switch (r) {
    case Resolution::Exact: return "exact";
    case Resolution::LowerBounded: return "lower_bounded";
    case Resolution::Never: return "never";
  }
  return "?";
}

Step tau_min_degree(const ColoredProcess& proc, std::uint32_t k) {
  if (k < 1 || k > proc.n - 1) {
    throw ConfigError("minimum degree target " + std::to_string(k) + " outside [1, " + std::to_string(proc.n - 1) +
                      "]");
  }
  std::vector<std::uint32_t> in(proc.n, 0), out(proc.n, 0);
  std::size_t deficient = proc.n;
  auto level = [&](Vertex v) { return proc.directed ? std::min(in[v], out[v]) : in[v]; };
  for (Step i = 0; i < proc.length(); ++i) {
    const auto& e = proc.edges[i];
    // undirected processes keep the degree in `in` for both endpoints
    for (auto [v, outgoing] : {std::pair{e.tail, true}, std::pair{e.head, false}}) {
      const bool before = level(v) >= k;
      if (!proc.directed || !outgoing) ++in[v];
      else ++out[v];
      if (!before && level(v) >= k) --deficient;
    }
    if (deficient == 0) return i + 1;
  }
  return proc.length();
}

std::optional<Step> tau_fit(const ColoredProcess& proc, const Pattern& p) {
  if (p.palette() > proc.r) throw ConfigError("pattern palette exceeds the process palette");
  const std::size_t width = static_cast<std::size_t>(proc.r) + 1;
  std::vector<std::uint32_t> in(proc.n * width, 0), out(proc.n * width, 0);
  std::vector<bool> fit(proc.n, false);
  std::size_t unfit = proc.n;
  auto row = [&](std::vector<std::uint32_t>& t, Vertex v) { return std::span(t).subspan(v * width, width); };
  auto check = [&](Vertex v) {
    if (fit[v]) return;
    const bool now = proc.directed ? fits_directed(row(in, v), row(out, v), p) : fits(row(in, v), p);
    if (now) {
      fit[v] = true;
      --unfit;
    }
  };
  for (Step i = 0; i < proc.length(); ++i) {
    const auto& e = proc.edges[i];
    ++in[e.head * width + e.color];
    ++(proc.directed ? out : in)[e.tail * width + e.color];
    check(e.tail);
    check(e.head);
    if (unfit == 0) return i + 1;
  }
  return std::nullopt;
}

std::optional<Step> first_time(const ColoredProcess& proc, const SnapshotPredicate& pred, Step lower) {
  const Step total = proc.length();
  if (lower > total) return std::nullopt;
  if (pred(snapshot(proc, lower))) return lower;
  Step lo = lower;  // pred(lo) false
  Step hi = 0;      // pred(hi) true once found
  for (Step d = 1;; d *= 2) {
    const Step t = std::min(total, lower + d);
    if (pred(snapshot(proc, t))) {
      hi = t;
      break;
    }
    lo = t;
    if (t == total) return std::nullopt;
  }
  while (hi - lo > 1) {
    const Step mid = lo + (hi - lo) / 2;
    if (pred(snapshot(proc, mid))) hi = mid;
    else lo = mid;
  }
  return hi;
}

std::optional<Step> first_time_linear(const ColoredProcess& proc, const SnapshotPredicate& pred) {
  ColoredGraph g(proc.n, proc.r, proc.directed);
  for (Step t = 0;; ++t) {
    if (pred(g)) return t;
    if (t == proc.length()) return std::nullopt;
    g.add_edge(proc.edges[t], t + 1);
  }
}

std::optional<Step> tau_pi_connected(const ColoredProcess& proc, const Pattern& p, Execution ex) {
  const Step lower = tau_min_degree(proc, 1);
  return first_time(proc, [&](const ColoredGraph& g) { return pi_connected(g, p, ex); }, lower);
}

namespace {

Step latest_step(const ColoredGraph& g, const std::vector<Vertex>& cycle) {
  Step last = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const Vertex u = cycle[i], v = cycle[(i + 1) % cycle.size()];
    for (const auto& inc : g.incident(u)) {
      if (inc.other == v && (!g.directed() || inc.outgoing)) last = std::max(last, inc.step);
    }
  }
  return last;
}

}  // namespace

HamiltonTime tau_pi_hamilton(const ColoredProcess& proc, const Pattern& p, SearchBudget budget,
                             std::optional<Step> fit_time) {
  if (proc.n % p.length() != 0) {
    throw ConfigError("pattern length " + std::to_string(p.length()) + " does not divide n = " +
                      std::to_string(proc.n));
  }
  HamiltonTime out;
  if (!fit_time) fit_time = tau_fit(proc, p);
  if (!fit_time) return out;

  const Step total = proc.length();
  bool exhausted = false;
  // A found cycle already exists once its latest edge has arrived, which tightens hi.
  Step witness = 0;
  auto eval = [&](Step t) {
    ++out.evaluations;
    const auto g = snapshot(proc, t);
    auto res = find_pi_hamilton(g, p, budget);
    out.nodes += res.nodes;
    if (res.status == SearchStatus::Exhausted) exhausted = true;
    if (res.status == SearchStatus::Found) witness = latest_step(g, res.cycle);
    return res.status;
  };

  // tau_fit <= tau_Pi: a cycle's two edges at each vertex witness fitting.
  Step lo = *fit_time;  // largest step known to have no cycle, once lo_known
  auto first = eval(lo);
  if (first == SearchStatus::Found) {
    out.resolution = Resolution::Exact;
    out.value = lo;
    return out;
  }
  if (exhausted) {
    out.resolution = Resolution::LowerBounded;
    out.value = lo;
    return out;
  }
  Step hi = 0;
  for (Step d = 1;; d *= 2) {
    const Step t = std::min(total, *fit_time + d);
    auto st = eval(t);
    if (st == SearchStatus::Found) {
      hi = witness;
      break;
    }
    if (exhausted) {
      out.resolution = Resolution::LowerBounded;
      out.value = lo + 1;
      return out;
    }
    lo = t;
    if (t == total) return out;
  }
  while (hi - lo > 1) {
    const Step mid = lo + (hi - lo) / 2;
    auto st = eval(mid);
    if (st == SearchStatus::Found) {
      hi = witness;
    } else if (exhausted) {
      out.resolution = Resolution::LowerBounded;
      out.value = lo + 1;
      return out;
    } else {
      lo = mid;
    }
  }
  out.resolution = Resolution::Exact;
  out.value = hi;
  return out;
}

HittingReport hitting_report(const ColoredProcess& proc, const Pattern& p, const HittingOptions& opt) {
  HittingReport rep;
  rep.directed = proc.directed;
  rep.tau_min_degree_1 = tau_min_degree(proc, 1);
  rep.tau_fit = tau_fit(proc, p);
  if (opt.connectivity) rep.tau_pi_connected = tau_pi_connected(proc, p, opt.execution);
  if (opt.hamilton) rep.tau_pi_hamilton = tau_pi_hamilton(proc, p, opt.budget, rep.tau_fit);
  return rep;
}

}  // namespace patternham
