#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "patternham/constructive.hpp"
#include "patternham/hamilton.hpp"
#include "patternham/pattern.hpp"

namespace patternham {

// Monte Carlo suites. thm1..thm4 compare hitting times on full processes; the
// corollary suites look at a single snapshot m(c):
//   cor_conn           m = round(n (log n + c) / 2), undirected
//   cor_conn_directed  m = round(n (log n + c)), directed
//   cor_ham            m = round(r n (log n + c) / (2 d)), undirected, d = d(Pi)
enum class Suite { Thm1, Thm2, Thm3, Thm4, CorConn, CorConnDirected, CorHam };

const char* to_string(Suite s) noexcept;
std::optional<Suite> parse_suite(std::string_view name);
bool suite_directed(Suite s) noexcept;
bool suite_uses_c(Suite s) noexcept;

struct ExperimentSpec {
  Suite suite = Suite::Thm1;
  std::vector<std::size_t> n{12};
  Pattern pattern{{1, 2}, 2};
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::vector<double> c{0.0};
  SearchBudget budget{};
  int threads = 0;        // 0: the OpenMP default
  bool timing = true;     // false writes walltime_ms = 0 so output is byte-stable
  bool pipeline = false;  // thm1: also run the constructive pipeline at tau_fit
  PipelineConfig pipeline_config{};
};

/// Throws ConfigError on an empty n list, zero trials, an n below 2, ell not dividing
/// n for the Hamilton suites, or a pattern palette the suite cannot use.
void validate(const ExperimentSpec& spec);

/// Snapshot size for a corollary suite, clamped to [0, full process length].
std::uint64_t snapshot_size(Suite s, std::size_t n, int r, int d, double c);

/// Seed of one trial: independent of the parallel width and of the other cells.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) noexcept;

struct TrialRow {
  std::size_t n = 0;
  double c = 0;
  std::uint64_t m = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool done = false;

  // thm1 / thm3
  std::optional<Step> tau_fit;
  std::optional<Step> tau_ham;
  bool resolved = true;  // the Hamilton answer is exact
  // thm2 / thm4
  Step tau_1 = 0;
  std::optional<Step> tau_conn;
  // equality indicator of the suite (thm1..4)
  bool equal = false;
  // corollary suites
  bool min_degree_ok = false;
  bool pi_connected = false;
  std::size_t unfit = 0;
  bool fits = false;
  bool hamilton = false;
  // thm1 with pipeline
  std::string pipeline;

  double walltime_ms = 0;
};

/// Wilson score interval at 95%.
struct Proportion {
  std::size_t hits = 0;
  std::size_t total = 0;
  double value = 0, lo = 0, hi = 0;
};
Proportion wilson(std::size_t hits, std::size_t total, double z = 1.959963984540054);

struct CellSummary {
  std::size_t n = 0;
  double c = 0;
  std::uint64_t m = 0;
  std::size_t trials = 0;      // completed
  std::size_t unresolved = 0;  // excluded from the Hamilton fractions
  Proportion equal;            // thm suites
  Proportion min_degree_ok;    // corollary suites
  Proportion pi_connected;
  Proportion fits;             // cor_ham
  Proportion hamilton;
  double lambda_hat = 0;       // mean unfit count
  double limit = 0;            // e^{-e^{-c}}, e^{-2e^{-c}} or e^{-lambda_hat}
  Proportion pipeline_success;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;  // cell-major, trial order; done = false after an interrupt
  std::vector<CellSummary> cells;
  bool complete = true;
};

/// Runs every trial of every cell, trial-parallel. Each trial runs its kernels
/// serially; rows come back in a fixed order whatever the width. Trials not yet
/// started when `stop` becomes true are skipped and the result marked incomplete.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::atomic<bool>* stop = nullptr);

/// Summary of the completed rows of one cell; recomputable from the CSV alone.
CellSummary summarize(const ExperimentSpec& spec, const std::vector<TrialRow>& cell_rows);

inline constexpr int kCsvSchemaVersion = 1;

/// One "# patternham-csv v1 suite=... columns=..." line, then a header and the done rows.
void write_csv(const ExperimentSpec& spec, const ExperimentResult& res, std::ostream& out);
void write_summary_json(const ExperimentSpec& spec, const ExperimentResult& res, std::ostream& out);

}  // namespace patternham
