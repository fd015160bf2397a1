#pragma once

#include <functional>
#include <optional>

#include "patternham/hamilton.hpp"
#include "patternham/process.hpp"
#include "patternham/verify.hpp"

namespace patternham {

// Hitting times are the 1-based index of the edge whose arrival makes the predicate
// true; a predicate already true on the empty graph reports 0. std::nullopt means
// "never", i.e. false even for the complete colored graph.

/// First step with minimum degree >= k (directed: min over in- and out-degree).
Step tau_min_degree(const ColoredProcess& proc, std::uint32_t k = 1);

/// First step at which every vertex fits the pattern.
std::optional<Step> tau_fit(const ColoredProcess& proc, const Pattern& p);

using SnapshotPredicate = std::function<bool(const ColoredGraph&)>;

/// Smallest t >= lower with pred(snapshot(t)), for a predicate monotone under edge
/// addition. Gallops upward from `lower`, then bisects.
std::optional<Step> first_time(const ColoredProcess& proc, const SnapshotPredicate& pred, Step lower = 0);

/// Linear scan used as a test oracle for first_time.
std::optional<Step> first_time_linear(const ColoredProcess& proc, const SnapshotPredicate& pred);

std::optional<Step> tau_pi_connected(const ColoredProcess& proc, const Pattern& p,
                                     Execution ex = Execution::Parallel);

enum class Resolution { Exact, LowerBounded, Never };
const char* to_string(Resolution r) noexcept;

/// tau_Pi. `value` is the hitting time when Exact and the smallest step not yet
/// excluded when LowerBounded (some evaluation ran out of budget).
struct HamiltonTime {
  Resolution resolution = Resolution::Never;
  Step value = 0;
  std::uint64_t nodes = 0;
  std::size_t evaluations = 0;
};

HamiltonTime tau_pi_hamilton(const ColoredProcess& proc, const Pattern& p, SearchBudget budget = {},
                             std::optional<Step> fit_time = std::nullopt);

struct HittingOptions {
  SearchBudget budget{};
  Execution execution = Execution::Parallel;
  bool hamilton = true;
  bool connectivity = true;
};

struct HittingReport {
  bool directed = false;
  Step tau_min_degree_1 = 0;
  std::optional<Step> tau_fit;
  std::optional<Step> tau_pi_connected;
  HamiltonTime tau_pi_hamilton;
};

HittingReport hitting_report(const ColoredProcess& proc, const Pattern& p, const HittingOptions& opt = {});

}  // namespace patternham
