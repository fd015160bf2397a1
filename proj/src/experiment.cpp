#include "patternham/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <json.hpp>
#include <omp.h>

#include "patternham/hitting.hpp"
#include "patternham/process.hpp"
#include "patternham/rng.hpp"
#include "patternham/verify.hpp"

namespace patternham {

namespace {

struct SuiteName {
  Suite suite;
  const char* name;
};
constexpr SuiteName kSuites[] = {
    {Suite::Thm1, "thm1"},       {Suite::Thm2, "thm2"},         {Suite::Thm3, "thm3"},
    {Suite::Thm4, "thm4"},       {Suite::CorConn, "cor_conn"}, {Suite::CorConnDirected, "cor_conn_directed"},
    {Suite::CorHam, "cor_ham"},
};

bool hamilton_suite(Suite s) { return s == Suite::Thm1 || s == Suite::Thm3 || s == Suite::CorHam; }

std::string fmt(double x, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string opt(const std::optional<Step>& s) { return s ? std::to_string(*s) : std::string(); }

}  // namespace

const char* to_string(Suite s) noexcept {
  for (const auto& e : kSuites)
    if (e.suite == s) return e.name;
  return "?";
}

std::optional<Suite> parse_suite(std::string_view name) {
  for (const auto& e : kSuites)
    if (name == e.name) return e.suite;
  return std::nullopt;
}

bool suite_directed(Suite s) noexcept {
  return s == Suite::Thm3 || s == Suite::Thm4 || s == Suite::CorConnDirected;
}

bool suite_uses_c(Suite s) noexcept {
  return s == Suite::CorConn || s == Suite::CorConnDirected || s == Suite::CorHam;
}

void validate(const ExperimentSpec& spec) {
  if (spec.n.empty()) throw ConfigError("no vertex counts given");
  if (spec.trials < 1) throw ConfigError("trials must be at least 1");
  if (suite_uses_c(spec.suite) && spec.c.empty()) throw ConfigError("no c values given");
  for (std::size_t n : spec.n) {
    if (n < 2) throw ConfigError("n must be at least 2");
    if (n > kMaxProcessVertices) throw CapacityError("n above " + std::to_string(kMaxProcessVertices));
    if (hamilton_suite(spec.suite) && n % spec.pattern.length() != 0)
      throw ConfigError("pattern length must divide n for Hamilton suites");
  }
}

std::uint64_t snapshot_size(Suite s, std::size_t n, int r, int d, double c) {
  const double nn = static_cast<double>(n), base = std::log(nn) + c;
  double m = 0;
  switch (s) {
    case Suite::CorConnDirected: m = nn * base; break;
    case Suite::CorHam: m = static_cast<double>(r) * nn * base / (2.0 * d); break;
    default: m = 0.5 * nn * base; break;
  }
  const double full = static_cast<double>(ColoredProcess::full_length(n, suite_directed(s)));
  return static_cast<std::uint64_t>(std::llround(std::clamp(m, 0.0, full)));
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) noexcept {
  return mix_seed(mix_seed(base_seed, n), trial);
}

Proportion wilson(std::size_t hits, std::size_t total, double z) {
  Proportion p{hits, total, 0, 0, 1};
  if (total == 0) return p;
  const double nn = static_cast<double>(total), ph = static_cast<double>(hits) / nn, z2 = z * z;
  const double den = 1 + z2 / nn, mid = (ph + z2 / (2 * nn)) / den;
  const double half = z * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn)) / den;
  p.value = ph;
  p.lo = std::max(0.0, mid - half);
  p.hi = std::min(1.0, mid + half);
  return p;
}

namespace {

void run_trial(const ExperimentSpec& spec, TrialRow& row) {
  const auto start = std::chrono::steady_clock::now();
  const Pattern& p = spec.pattern;
  const bool directed = suite_directed(spec.suite);
  const auto proc = generate(row.n, p.palette(), row.seed, directed);
  switch (spec.suite) {
    case Suite::Thm1:
    case Suite::Thm3: {
      row.tau_fit = tau_fit(proc, p);
      const auto h = tau_pi_hamilton(proc, p, spec.budget, row.tau_fit);
      row.resolved = h.resolution != Resolution::LowerBounded;
      if (h.resolution == Resolution::Exact) row.tau_ham = h.value;
      row.equal = row.resolved && row.tau_fit == row.tau_ham;
      if (spec.pipeline && row.tau_fit) {
        try {
          row.pipeline = to_string(run_pipeline(proc, p, spec.pipeline_config).stage);
        } catch (const ConfigError&) {
          row.pipeline = "config";
        }
      }
      break;
    }
    case Suite::Thm2:
    case Suite::Thm4:
      row.tau_1 = tau_min_degree(proc, 1);
      row.tau_conn = tau_pi_connected(proc, p, Execution::Serial);
      row.equal = row.tau_conn == row.tau_1;
      break;
    case Suite::CorConn:
    case Suite::CorConnDirected: {
      const auto g = snapshot(proc, row.m);
      row.min_degree_ok = g.min_degree() >= 1;
      // a vertex without in- or out-edges is unreachable or cannot leave
      row.pi_connected = row.min_degree_ok && pi_connected(g, p, Execution::Serial);
      break;
    }
    case Suite::CorHam: {
      const auto g = snapshot(proc, row.m);
      for (Vertex v = 0; v < row.n; ++v) row.unfit += !g.fits_at(v, p);
      row.fits = row.unfit == 0;
      if (row.fits) {
        const auto r = find_pi_hamilton(g, p, spec.budget);
        row.resolved = r.status != SearchStatus::Exhausted;
        row.hamilton = r.status == SearchStatus::Found;
      }
      break;
    }
  }
  if (spec.timing)
    row.walltime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  row.done = true;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::atomic<bool>* stop) {
  validate(spec);
  const int d = demand(spec.pattern).demand;
  const std::vector<double> cs = suite_uses_c(spec.suite) ? spec.c : std::vector<double>{0.0};
  ExperimentResult res;
  for (std::size_t n : spec.n) {
    for (double c : cs) {
      const std::uint64_t m =
          suite_uses_c(spec.suite) ? snapshot_size(spec.suite, n, spec.pattern.palette(), d, c) : 0;
      for (std::size_t t = 0; t < spec.trials; ++t) {
        TrialRow row;
        row.n = n, row.c = c, row.m = m, row.trial = t, row.seed = trial_seed(spec.base_seed, n, t);
        res.rows.push_back(row);
      }
    }
  }
  const auto total = static_cast<std::ptrdiff_t>(res.rows.size());
  const int width = spec.threads > 0 ? spec.threads : omp_get_max_threads();
  std::exception_ptr error;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic, 1) num_threads(width)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    if ((stop && stop->load(std::memory_order_relaxed)) || failed.load(std::memory_order_relaxed)) continue;
    try {
      run_trial(spec, res.rows[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(experiment_error)
      if (!error) error = std::current_exception();
      failed = true;
    }
  }
  if (error) std::rethrow_exception(error);

  for (const auto& row : res.rows) res.complete &= row.done;
  const std::size_t per_cell = spec.trials;
  for (std::size_t at = 0; at < res.rows.size(); at += per_cell) {
    std::vector<TrialRow> cell(res.rows.begin() + static_cast<std::ptrdiff_t>(at),
                               res.rows.begin() + static_cast<std::ptrdiff_t>(at + per_cell));
    res.cells.push_back(summarize(spec, cell));
  }
  return res;
}

CellSummary summarize(const ExperimentSpec& spec, const std::vector<TrialRow>& rows) {
  CellSummary s;
  if (!rows.empty()) s.n = rows.front().n, s.c = rows.front().c, s.m = rows.front().m;
  std::size_t eq = 0, resolved = 0, md = 0, pc = 0, fits = 0, ham = 0, ham_total = 0, pipe = 0, pipe_total = 0;
  double unfit = 0;
  for (const auto& r : rows) {
    if (!r.done) continue;
    ++s.trials;
    if (!r.resolved) {
      ++s.unresolved;
    } else {
      ++resolved;
      eq += r.equal;
    }
    md += r.min_degree_ok;
    pc += r.pi_connected;
    fits += r.fits;
    unfit += static_cast<double>(r.unfit);
    if (r.resolved) ++ham_total, ham += r.hamilton;
    if (!r.pipeline.empty()) ++pipe_total, pipe += r.pipeline == "done";
  }
  s.equal = wilson(eq, resolved);
  s.min_degree_ok = wilson(md, s.trials);
  s.pi_connected = wilson(pc, s.trials);
  s.fits = wilson(fits, s.trials);
  s.hamilton = wilson(ham, ham_total);
  s.pipeline_success = wilson(pipe, pipe_total);
  s.lambda_hat = s.trials ? unfit / static_cast<double>(s.trials) : 0.0;
  switch (spec.suite) {
    case Suite::CorConn: s.limit = std::exp(-std::exp(-s.c)); break;
    case Suite::CorConnDirected: s.limit = std::exp(-2 * std::exp(-s.c)); break;
    case Suite::CorHam: s.limit = std::exp(-s.lambda_hat); break;
    default: break;
  }
  return s;
}

void write_csv(const ExperimentSpec& spec, const ExperimentResult& res, std::ostream& out) {
  std::string cols;
  switch (spec.suite) {
    case Suite::Thm1:
    case Suite::Thm3:
      cols = spec.pipeline ? "n,trial,seed,tau_fit,tau_ham,resolved,equal,pipeline,walltime_ms"
                           : "n,trial,seed,tau_fit,tau_ham,resolved,equal,walltime_ms";
      break;
    case Suite::Thm2:
    case Suite::Thm4: cols = "n,trial,seed,tau_1,tau_conn,equal,walltime_ms"; break;
    case Suite::CorConn:
    case Suite::CorConnDirected: cols = "n,c,m,trial,seed,min_degree_ok,pi_connected,walltime_ms"; break;
    case Suite::CorHam: cols = "n,c,m,trial,seed,unfit,fits,hamilton,resolved,walltime_ms"; break;
  }
  out << "# patternham-csv v" << kCsvSchemaVersion << " suite=" << to_string(spec.suite)
      << " pattern=" << spec.pattern.to_string() << " r=" << spec.pattern.palette()
      << " base_seed=" << spec.base_seed << " trials=" << spec.trials
      << " budget=" << spec.budget.max_nodes << " complete=" << (res.complete ? 1 : 0) << "\n";
  out << cols << "\n";
  for (const auto& r : res.rows) {
    if (!r.done) continue;
    const std::string ms = fmt(r.walltime_ms, "%.3f");
    switch (spec.suite) {
      case Suite::Thm1:
      case Suite::Thm3:
        out << r.n << ',' << r.trial << ',' << r.seed << ',' << opt(r.tau_fit) << ',' << opt(r.tau_ham) << ','
            << r.resolved << ',' << r.equal << ',';
        if (spec.pipeline) out << (r.pipeline.empty() ? "skipped" : r.pipeline) << ',';
        out << ms << "\n";
        break;
      case Suite::Thm2:
      case Suite::Thm4:
        out << r.n << ',' << r.trial << ',' << r.seed << ',' << r.tau_1 << ',' << opt(r.tau_conn) << ','
            << r.equal << ',' << ms << "\n";
        break;
      case Suite::CorConn:
      case Suite::CorConnDirected:
        out << r.n << ',' << fmt(r.c) << ',' << r.m << ',' << r.trial << ',' << r.seed << ',' << r.min_degree_ok
            << ',' << r.pi_connected << ',' << ms << "\n";
        break;
      case Suite::CorHam:
        out << r.n << ',' << fmt(r.c) << ',' << r.m << ',' << r.trial << ',' << r.seed << ',' << r.unfit << ','
            << r.fits << ',' << r.hamilton << ',' << r.resolved << ',' << ms << "\n";
        break;
    }
  }
}

void write_summary_json(const ExperimentSpec& spec, const ExperimentResult& res, std::ostream& out) {
  using nlohmann::json;
  auto prop = [](const Proportion& p) {
    return json{{"hits", p.hits}, {"total", p.total}, {"value", p.value}, {"wilson95", {p.lo, p.hi}}};
  };
  json cells = json::array();
  for (const auto& c : res.cells) {
    json j{{"n", c.n}, {"trials", c.trials}};
    switch (spec.suite) {
      case Suite::Thm1:
      case Suite::Thm3:
        j["unresolved"] = c.unresolved;
        j["equal_fraction"] = prop(c.equal);
        if (spec.pipeline) j["pipeline_success"] = prop(c.pipeline_success);
        break;
      case Suite::Thm2:
      case Suite::Thm4: j["equal_fraction"] = prop(c.equal); break;
      case Suite::CorConn:
      case Suite::CorConnDirected:
        j["c"] = c.c, j["m"] = c.m;
        j["min_degree_ok"] = prop(c.min_degree_ok);
        j["pi_connected"] = prop(c.pi_connected);
        j["limit"] = c.limit;
        break;
      case Suite::CorHam:
        j["c"] = c.c, j["m"] = c.m;
        j["unresolved"] = c.unresolved;
        j["lambda_hat"] = c.lambda_hat;
        j["exp_minus_lambda_hat"] = c.limit;
        j["fits"] = prop(c.fits);
        j["hamilton"] = prop(c.hamilton);
        break;
    }
    cells.push_back(std::move(j));
  }
  json top{{"suite", to_string(spec.suite)},
           {"pattern", spec.pattern.to_string()},
           {"r", spec.pattern.palette()},
           {"directed", suite_directed(spec.suite)},
           {"base_seed", spec.base_seed},
           {"trials", spec.trials},
           {"budget", spec.budget.max_nodes},
           {"complete", res.complete},
           {"cells", cells}};
  if (suite_uses_c(spec.suite)) {
    top["m_rule"] = spec.suite == Suite::CorConnDirected ? "round(n (ln n + c))"
                    : spec.suite == Suite::CorHam        ? "round(r n (ln n + c) / (2 d))"
                                                         : "round(n (ln n + c) / 2)";
  }
  out << top.dump(2) << "\n";
}

}  // namespace patternham
