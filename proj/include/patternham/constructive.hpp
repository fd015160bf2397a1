#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "patternham/graph.hpp"
#include "patternham/pattern.hpp"
#include "patternham/process.hpp"

namespace patternham {

// The 2-factor pipeline: classify low-degree vertices, cover them by pattern paths,
// match the remaining layers into paths V_1 -> ... -> V_ell, join heads to tails by
// Pi_ell edges and merge the resulting cycles. Every path is stored tail to head and
// reads Pi_1, ..., Pi_{ell-1} (mod ell), so any Pi_ell edge from a head to a tail
// continues the pattern.

struct PipelineConfig {
  std::optional<double> eps;            // window scale; default r / (8 ell d)
  std::optional<double> beta;           // bad threshold is floor(beta log n); default gives 0
  std::optional<double> bad_threshold;  // absolute override of beta log n
  std::size_t quota = 3;                // kept edges per vertex and side
  std::uint64_t merge_budget = 2'000'000;  // rotation steps in the merging stage
  bool strict_windows = false;          // only window edges with the designated orientation
  bool corrected_stopping = true;       // heads stop at Pi_{ell-1}, tails at Pi_1
  bool interleaved_layers = false;      // V_i = {v : v = i - 1 mod ell} instead of blocks
  std::uint64_t seed = 0;               // rebalancing and merging stream
  std::optional<Step> reference_time;   // default tau_fit
};

/// Resolved constants for one (process, pattern, config).
struct PipelineSetup {
  std::size_t n = 0;
  std::size_t ell = 0;
  int demand = 0;
  double eps = 0;
  double beta = 0;
  double mu = 0;
  double bad_threshold = 0;   // counts <= this are bad
  double tbad_threshold = 0;  // log log n
  Step reference = 0;
  std::vector<Step> t;                // t_0 .. t_{2 ell}, t_i = floor(i mu)
  std::vector<std::uint32_t> layer;   // 0-based original layer per vertex
};

/// Validates and resolves. Throws ConfigError when ell < 2, ell does not divide n,
/// the process is shorter than the 2 ell windows, or tau_fit does not exist.
PipelineSetup prepare_pipeline(const ColoredProcess& proc, const Pattern& p, const PipelineConfig& cfg);

/// Window j in [1, 2 ell] is (t_{j-1}, t_j]; X_i is window i and Y_i is window ell + i.
inline bool in_window(const PipelineSetup& s, std::size_t j, Step step) noexcept {
  return step > s.t[j - 1] && step <= s.t[j];
}

/// For j in [ell], BAD_j holds the layer-j vertices with at most `bad_threshold`
/// edges v -> w of color Pi_j into V_{j+1}; BAD_{ell+j} the layer-j vertices with at
/// most that many edges w -> v of color Pi_{j-1} from V_{j-1} (layer indices cyclic).
/// Strict mode counts only window j (out-oriented) and window ell+j (in-oriented).
/// TBAD: bad vertices with at least d(Pi) colors of degree <= log log n at the reference time.
struct BadClassification {
  std::vector<std::vector<Vertex>> bad_j;  // index j - 1
  std::vector<char> bad;
  std::vector<char> tbad;
  std::size_t bad_count = 0;
  std::size_t tbad_count = 0;
  std::size_t max_bad_degree = 0;  // largest number of bad neighbors of any vertex
};

BadClassification classify_bad(const ColoredGraph& g, const Pattern& p, const PipelineSetup& s, bool strict);
BadClassification classify_bad(const ColoredProcess& proc, const Pattern& p, const PipelineConfig& cfg);

struct CoverPath {
  std::vector<Vertex> vertices;  // tail first
  std::vector<Color> colors;
  Vertex covered = kNoVertex;    // the bad vertex it was grown around, if any
  Vertex tail() const { return vertices.front(); }
  Vertex head() const { return vertices.back(); }
};

struct CoverBreak {
  Vertex vertex = kNoVertex;
  int step = 0;  // 2: no starting pair, 3: head side stuck, 4: tail side stuck
};

struct CoverResult {
  std::vector<CoverPath> paths;
  std::vector<char> used;  // vertices on some path
  std::optional<CoverBreak> broke;
};

inline constexpr std::size_t kCoverRestarts = 16;

/// Grows one path around each bad vertex through unused vertices, the one with the
/// fewest free neighbors in its scarcest pattern color first (ties by degree, then id).
/// Candidates are chosen to spare the few options of other uncovered bad vertices.
/// When a vertex cannot be covered the cover restarts with it processed first, at
/// most `kCoverRestarts` times. Interior vertices may themselves be bad, which covers
/// them too. Endpoints avoid `no_end` and prefer, in order, a good vertex with a
/// Pi_ell edge towards the layer it will be joined to (`layer`, when given), any
/// vertex with such an edge, any good vertex. Tries each starting position i in turn.
CoverResult cover_bad(const ColoredGraph& g, const Pattern& p, const std::vector<char>& bad,
                      bool corrected_stopping = true, const std::vector<std::uint32_t>* layer = nullptr,
                      const std::vector<char>* no_end = nullptr);

struct Move {
  Vertex vertex;
  std::uint32_t from;
  std::uint32_t to;
};

struct Rebalanced {
  std::vector<std::vector<Vertex>> layers;
  std::vector<Move> moves;
};

/// Moves the fewest vertices that equalize the layer sizes. Donors come from the
/// fullest layer; a donor is drawn uniformly from those `eligible` for the target
/// layer when any are, otherwise uniformly. Throws ConfigError when the total size
/// is not a multiple of the layer count.
Rebalanced rebalance(std::vector<std::vector<Vertex>> layers, std::uint64_t seed,
                     const std::function<bool(Vertex, std::uint32_t)>& eligible = {});

struct HallFailure {
  std::size_t stage = 0;  // matching index i (1-based); 0 for the endpoint matching
  std::vector<Vertex> witness;  // left-side vertices whose neighborhood is too small
  std::vector<Vertex> unmatched;  // both sides, under one maximum matching
};

/// Which edges feed a matching. Window edges (with the designated orientation) come
/// first; unless strict, each vertex is topped up from the whole snapshot, and a
/// failed matching is retried on every usable edge.
struct EdgeSource {
  std::size_t out_window = 0;  // 0 = none
  std::size_t in_window = 0;
  std::size_t quota = 6;
  bool strict = false;
  const std::vector<char>* preferred = nullptr;       // partners tried first, by vertex
  std::function<bool(Vertex, Vertex)> forbid;         // (left, right) pairs never used
};

struct MatchStats {
  std::size_t topped_up = 0;      // vertices whose window lacked `quota` edges
  std::size_t full_retries = 0;   // matchings recomputed on all edges
};

/// Perfect matching left -> right using edges of color c traversable left to right.
/// Returns right partner per left index, or a Hall failure.
std::optional<std::vector<Vertex>> perfect_matching(const ColoredGraph& g, const PipelineSetup* s,
                                                    const std::vector<Vertex>& left,
                                                    const std::vector<Vertex>& right, Color c,
                                                    const EdgeSource& src, MatchStats& stats,
                                                    HallFailure& failure);

struct LayerMatchings {
  std::vector<std::vector<Vertex>> mate;  // mate[i-1][k]: partner in layer i+1 of layers[i-1][k]
  std::optional<HallFailure> failure;
  MatchStats stats;
};

LayerMatchings layer_matchings(const ColoredGraph& g, const Pattern& p, const PipelineSetup* s,
                               const std::vector<std::vector<Vertex>>& layers, std::size_t quota,
                               bool strict);

/// Paths V_1 -> V_ell read off the layer matchings.
std::vector<CoverPath> chain_paths(const ColoredGraph& g, const std::vector<std::vector<Vertex>>& layers,
                                   const LayerMatchings& m);

struct EndpointMatching {
  std::vector<std::size_t> succ;  // path i's head is joined to path succ[i]'s tail
  std::optional<HallFailure> failure;
  MatchStats stats;
};

/// M*: a perfect matching of heads to tails by Pi_ell edges. `good` marks paths whose
/// endpoints are preferred quota targets.
EndpointMatching endpoint_matching(const ColoredGraph& g, const Pattern& p, const PipelineSetup* s,
                                   const std::vector<CoverPath>& paths, const std::vector<char>& good,
                                   std::size_t quota, bool strict);

struct TwoFactor {
  std::vector<std::vector<Vertex>> cycles;
  std::size_t permutation_cycles = 0;
};

/// Joins paths along succ. Throws std::logic_error when the result is not a 2-factor.
TwoFactor assemble_two_factor(const std::vector<CoverPath>& paths, const std::vector<std::size_t>& succ,
                              std::size_t n);

struct MergeResult {
  std::optional<std::vector<Vertex>> cycle;
  std::vector<std::size_t> order;  // path order around the final cycle
  std::size_t exchanges = 0;
  std::size_t rotations = 0;
  std::size_t cycles_before = 0;
  std::size_t cycles_left = 0;
};

/// Works on the digraph with one node per path and an arc i -> j for every Pi_ell edge
/// from head i to tail j. Two-arc exchanges merge cycles of succ while possible; the
/// rest are merged one at a time by opening into a path and closing it with double
/// rotations, at most `budget` rotations in total.
MergeResult merge_cycles(const ColoredGraph& g, const Pattern& p, const std::vector<CoverPath>& paths,
                         std::vector<std::size_t> succ, std::uint64_t budget, std::uint64_t seed);

enum class Stage { Setup, Classify, Cover, Rebalance, Matchings, Endpoints, TwoFactor, Merge, Done };
const char* to_string(Stage s) noexcept;

inline constexpr std::size_t kPipelineRounds = 32;

struct PipelineResult {
  Stage stage = Stage::Setup;  // Done on success, otherwise the failing stage
  bool success = false;
  std::vector<Vertex> cycle;
  std::vector<std::size_t> permutation;  // M* as a permutation of path indices
  std::size_t permutation_cycles = 0;
  std::string failure;
  std::vector<Vertex> witness;

  Step reference = 0;
  double eps = 0, beta = 0, bad_threshold = 0;
  std::size_t bad = 0, tbad = 0, max_bad_degree = 0;
  std::size_t bad_paths = 0, good_paths = 0;
  std::vector<std::size_t> bad_path_lengths;  // edges per bad-cover path
  std::size_t moved = 0;
  std::size_t rounds = 0;       // cover-match rounds
  std::size_t reclassified = 0; // vertices added to BAD by later rounds
  std::size_t relocated = 0;    // stranded vertices moved to another layer instead
  MatchStats matching;
  std::size_t exchanges = 0, rotations = 0;
};

/// Runs every stage at the reference time. A vertex that loses every usable layer
/// edge once the cover is built moves to a layer where it keeps both; failing that,
/// or when a maximum matching leaves it unmatched, it is added to BAD and the cover
/// and matchings are rebuilt (at most `kPipelineRounds` rounds). Success output
/// always passes verify_pi_hamilton; a failed self-check is a logic_error.
PipelineResult run_pipeline(const ColoredProcess& proc, const Pattern& p, const PipelineConfig& cfg = {});

}  // namespace patternham
