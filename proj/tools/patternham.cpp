// patternham: pattern demand, hitting times, Monte Carlo suites, single-snapshot
// Hamilton search and certificate routing. Vertices are 1-based on the command line.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "patternham/constructive.hpp"
#include "patternham/experiment.hpp"
#include "patternham/hamilton.hpp"
#include "patternham/hitting.hpp"
#include "patternham/process.hpp"
#include "patternham/router.hpp"
#include "patternham/verify.hpp"

using namespace patternham;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};
extern "C" void on_sigint(int) { g_stop = true; }

// Where a process comes from: a file, or generate flags.
struct Source {
  std::string file;
  std::size_t n = 12;
  int r = 0;
  std::uint64_t seed = 0;
  bool directed = false;
};

void add_source(CLI::App* cmd, Source& s) {
  cmd->add_option("--process", s.file, "process file (pcham v1)");
  cmd->add_option("--n", s.n, "vertices when generating");
  cmd->add_option("--r", s.r, "palette size (default: the pattern's)");
  cmd->add_option("--seed", s.seed, "generator seed");
  cmd->add_flag("--directed", s.directed, "directed process");
}

ColoredProcess load(const Source& s, const Pattern& p) {
  if (!s.file.empty()) {
    auto proc = read_process_file(s.file);
    if (s.directed && !proc.directed) throw ParseError(1, "--directed given but the file holds an undirected process");
    if (proc.r != p.palette()) throw ConfigError("pattern palette differs from the process palette");
    return proc;
  }
  return generate(s.n, s.r ? s.r : p.palette(), s.seed, s.directed);
}

Pattern parse_pattern(const std::string& text, int r) { return Pattern::parse(text, r); }

std::string vertices(const std::vector<Vertex>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? "," : "") + std::to_string(vs[i] + 1);
  return out;
}

std::string colors(const std::vector<Color>& cs) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i) out += (i ? "," : "") + std::to_string(cs[i]);
  return out;
}

json opt_step(const std::optional<Step>& s) { return s ? json(*s) : json(nullptr); }

struct PipelineFlags {
  std::optional<double> eps, beta;
  std::size_t quota = PipelineConfig{}.quota;
  bool strict = false;
  bool literal_stopping = false;
  bool interleaved = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--eps", eps, "window scale");
    cmd->add_option("--beta", beta, "bad threshold is floor(beta log n)");
    cmd->add_option("--quota", quota, "kept edges per vertex and side");
    cmd->add_flag("--strict-windows", strict, "window edges only");
    cmd->add_flag("--literal-stopping", literal_stopping, "stop bad-cover paths by the literal color rule");
    cmd->add_flag("--interleaved-layers", interleaved, "layer of v is v mod ell");
  }
  PipelineConfig config(std::uint64_t seed) const {
    PipelineConfig c;
    c.eps = eps, c.beta = beta, c.quota = quota, c.strict_windows = strict;
    c.corrected_stopping = !literal_stopping, c.interleaved_layers = interleaved, c.seed = seed;
    return c;
  }
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patternham: Pi-colored Hamilton cycles and connectivity in random colored graph processes"};
  app.require_subcommand(1);

  std::string pattern_text;
  int palette = 0;

  // demand
  auto* demand_cmd = app.add_subcommand("demand", "demand d(Pi), a minimum witness and |D(Pi)|");
  bool demand_directed = false;
  demand_cmd->add_option("--pattern", pattern_text, "pattern, e.g. 1,2,2,3")->required();
  demand_cmd->add_option("--r", palette, "palette size (default: largest color)");
  demand_cmd->add_flag("--directed", demand_directed, "directed demand");

  // hitting
  auto* hitting_cmd = app.add_subcommand("hitting", "all hitting times of one process, as JSON");
  Source hit_src;
  std::uint64_t hit_budget = SearchBudget{}.max_nodes;
  add_source(hitting_cmd, hit_src);
  hitting_cmd->add_option("--pattern", pattern_text)->required();
  hitting_cmd->add_option("--budget", hit_budget, "finder nodes per evaluation");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo suite: CSV rows and a JSON summary");
  std::string suite_name = "thm1", n_list = "12", c_list = "0", format = "csv", out_path, summary_path;
  ExperimentSpec spec;
  bool no_timing = false;
  std::uint64_t exp_budget = SearchBudget{}.max_nodes;
  PipelineFlags exp_pipe;
  exp_cmd->add_option("--suite", suite_name, "thm1|thm2|thm3|thm4|cor_conn|cor_conn_directed|cor_ham");
  exp_cmd->add_option("--n", n_list, "comma-separated vertex counts");
  exp_cmd->add_option("--pattern", pattern_text)->required();
  exp_cmd->add_option("--r", palette, "palette size");
  exp_cmd->add_option("--trials", spec.trials);
  exp_cmd->add_option("--seed", spec.base_seed, "base seed");
  exp_cmd->add_option("--c", c_list, "comma-separated constants c for the corollary suites");
  exp_cmd->add_option("--budget", exp_budget, "finder nodes per evaluation");
  exp_cmd->add_option("--threads", spec.threads, "parallel width (0: default)");
  exp_cmd->add_flag("--no-timing", no_timing, "write walltime_ms = 0 for byte-stable output");
  exp_cmd->add_flag("--pipeline", spec.pipeline, "thm1: also run the constructive pipeline");
  exp_cmd->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  exp_cmd->add_option("--out", out_path, "output file (default stdout)");
  exp_cmd->add_option("--summary", summary_path, "also write the JSON summary here");
  exp_pipe.add(exp_cmd);

  // find
  auto* find_cmd = app.add_subcommand("find", "search one snapshot for a Pi-colored Hamilton cycle");
  Source find_src;
  std::optional<Step> find_t;
  std::string mode = "exact";
  std::uint64_t find_budget = SearchBudget{}.max_nodes;
  PipelineFlags find_pipe;
  add_source(find_cmd, find_src);
  find_cmd->add_option("--pattern", pattern_text)->required();
  find_cmd->add_option("--t", find_t, "snapshot step (default: tau_fit, else the full process)");
  find_cmd->add_option("--mode", mode, "exact|pipeline")->check(CLI::IsMember({"exact", "pipeline"}));
  find_cmd->add_option("--budget", find_budget, "finder nodes");
  find_pipe.add(find_cmd);

  // route
  auto* route_cmd = app.add_subcommand("route", "a Pi-colored path u -> v through a connectivity certificate");
  Source route_src;
  std::optional<Step> route_t;
  std::size_t ru = 0, rv = 0;
  add_source(route_cmd, route_src);
  route_cmd->add_option("--pattern", pattern_text)->required();
  route_cmd->add_option("--t", route_t, "snapshot step (default: the full process)");
  route_cmd->add_option("--u", ru, "source (1-based)")->required();
  route_cmd->add_option("--v", rv, "target (1-based)")->required();
  route_cmd->add_flag("--interleaved-layers", find_pipe.interleaved, "class of v is v mod ell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*demand_cmd) {
      const Pattern p = parse_pattern(pattern_text, palette);
      const DemandResult d = demand_directed ? directed_demand(p) : demand(p);
      std::cout << "pattern " << p.to_string() << " r=" << p.palette() << (demand_directed ? " directed" : "") << "\n";
      std::cout << "d = " << d.demand << "\n";
      std::cout << "witness positions:";
      if (demand_directed) {
        for (auto [pos, sign] : d.directed_witness) std::cout << ' ' << pos << (sign == Sign::Out ? '+' : '-');
      } else {
        for (auto pos : d.witness) std::cout << ' ' << pos;
      }
      std::cout << "\n|D(Pi)| = " << d.cover_count << "\n";
      return 0;
    }

    if (*hitting_cmd) {
      const Pattern p = parse_pattern(pattern_text, hit_src.r);
      const auto proc = load(hit_src, p);
      HittingOptions opt;
      opt.budget.max_nodes = hit_budget;
      const auto rep = hitting_report(proc, p, opt);
      json j{{"n", proc.n},
             {"r", proc.r},
             {"directed", proc.directed},
             {"seed", proc.seed},
             {"pattern", p.to_string()},
             {"tau_1", rep.tau_min_degree_1},
             {"tau_fit", opt_step(rep.tau_fit)},
             {"tau_pi_connected", opt_step(rep.tau_pi_connected)},
             {"tau_pi", rep.tau_pi_hamilton.resolution == Resolution::Never ? json(nullptr)
                                                                             : json(rep.tau_pi_hamilton.value)},
             {"tau_pi_resolution", to_string(rep.tau_pi_hamilton.resolution)},
             {"finder_nodes", rep.tau_pi_hamilton.nodes},
             {"equal_fit_pi", rep.tau_pi_hamilton.resolution == Resolution::Exact &&
                                  rep.tau_fit == std::optional<Step>(rep.tau_pi_hamilton.value)},
             {"equal_1_connected", rep.tau_pi_connected == std::optional<Step>(rep.tau_min_degree_1)}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*exp_cmd) {
      auto suite = parse_suite(suite_name);
      if (!suite) throw ConfigError("unknown suite " + suite_name);
      spec.suite = *suite;
      spec.pattern = parse_pattern(pattern_text, palette);
      spec.n.clear();
      for (const auto& s : split(n_list)) spec.n.push_back(std::stoul(s));
      spec.c.clear();
      for (const auto& s : split(c_list)) spec.c.push_back(std::stod(s));
      spec.budget.max_nodes = exp_budget;
      spec.timing = !no_timing;
      spec.pipeline_config = exp_pipe.config(spec.base_seed);
      std::signal(SIGINT, on_sigint);
      const auto res = run_experiment(spec, &g_stop);
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw IoError("cannot open " + out_path + " for writing");
      }
      std::ostream& out = out_path.empty() ? std::cout : file;
      if (format == "csv") {
        write_csv(spec, res, out);
      } else {
        write_summary_json(spec, res, out);
      }
      if (!summary_path.empty()) {
        std::ofstream sum(summary_path);
        if (!sum) throw IoError("cannot open " + summary_path + " for writing");
        write_summary_json(spec, res, sum);
      }
      if (!res.complete) std::cerr << "interrupted: partial results written\n";
      return res.complete ? 0 : 130;
    }

    if (*find_cmd) {
      const Pattern p = parse_pattern(pattern_text, find_src.r);
      const auto proc = load(find_src, p);
      Step t = find_t ? *find_t : tau_fit(proc, p).value_or(proc.length());
      if (t > proc.length()) throw ConfigError("--t beyond the process length");
      const auto g = snapshot(proc, t);
      std::cout << "snapshot t=" << t << " n=" << proc.n << " edges=" << g.edge_count() << "\n";
      if (mode == "exact") {
        if (proc.n % p.length() != 0) throw ConfigError("pattern length must divide n");
        const auto r = proc.directed ? find_pi_hamilton_directed(g, p, {find_budget}) : find_pi_hamilton(g, p, {find_budget});
        std::cout << "status " << to_string(r.status) << " nodes=" << r.nodes << "\n";
        if (r.status == SearchStatus::Found) {
          const auto v = verify_pi_hamilton(g, p, r.cycle);
          std::cout << "cycle " << vertices(r.cycle) << "\nverified " << (v ? "yes" : "no: " + v.reason) << "\n";
        }
        return 0;
      }
      auto cfg = find_pipe.config(find_src.seed);
      cfg.reference_time = t;
      const auto r = run_pipeline(proc, p, cfg);
      std::cout << "stage " << to_string(r.stage) << (r.success ? "" : " (failed: " + r.failure + ")") << "\n";
      std::cout << "bad=" << r.bad << " tbad=" << r.tbad << " bad_paths=" << r.bad_paths
                << " good_paths=" << r.good_paths << " rounds=" << r.rounds
                << " permutation_cycles=" << r.permutation_cycles << "\n";
      if (!r.witness.empty()) std::cout << "witness " << vertices(r.witness) << "\n";
      if (r.success) {
        const auto v = verify_pi_hamilton(g, p, r.cycle);
        std::cout << "cycle " << vertices(r.cycle) << "\nverified " << (v ? "yes" : "no: " + v.reason) << "\n";
      }
      return 0;
    }

    if (*route_cmd) {
      const Pattern p = parse_pattern(pattern_text, route_src.r);
      const auto proc = load(route_src, p);
      const Step t = route_t.value_or(proc.length());
      if (t > proc.length()) throw ConfigError("--t beyond the process length");
      if (ru < 1 || ru > proc.n || rv < 1 || rv > proc.n) throw ConfigError("--u and --v must lie in [1, n]");
      const auto u = static_cast<Vertex>(ru - 1), v = static_cast<Vertex>(rv - 1);
      if (u == v) {
        std::cout << "path " << ru << "\ncolors \n";
        return 0;
      }
      RouterConfig rc;
      rc.interleaved_layers = find_pipe.interleaved;
      rc.seed = route_src.seed;
      const auto built = build_certificate(proc, p, t, rc);
      if (built.certificate) {
        const auto path = route(*built.certificate, u, v);
        std::cout << "via certificate (cycle " << built.certificate->cycle.size() << ", spikes "
                  << built.certificate->spikes.size() << ")\n";
        std::cout << "path " << vertices(path.vertices) << "\ncolors " << colors(path.colors) << "\n";
        return 0;
      }
      std::cout << "certificate failed at " << to_string(built.failure->stage) << ": " << built.failure->reason
                << "\nfallback: product-graph search\n";
      const auto path = extract_pi_path(snapshot(proc, t), p, u, v);
      if (!path) {
        std::cout << "unreachable\n";
        return 0;
      }
      std::cout << "path " << vertices(path->vertices) << "\ncolors " << colors(path->colors) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
