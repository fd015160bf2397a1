#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "patternham/graph.hpp"
#include "patternham/pattern.hpp"
#include "patternham/process.hpp"
#include "patternham/verify.hpp"

namespace patternham {

// A Pi-colored cycle C through most vertices plus one spike per remaining vertex.
// C is stored in the orientation that reads Pi_1, Pi_2, ... along travel: the edge
// cycle[k] -> cycle[k+1] has color Pi_{(k mod ell) + 1}, so cycle[k] sits in class
// k mod ell. Every route leaves its source through a spike (if off C), follows C
// forward and arrives through a spike.
//
// Undirected spike around head v with k = k(v) (0-based phase):
//   v -- hub     color Pi_k          (hub off C)
//   enter -- hub color Pi_{k-1}      enter on C in class k-1
//   hub -- exit  color Pi_{k+1}      exit on C in class k+2
// Directed spike, two hubs (experimental):
//   in_hub -> v    Pi_k,   enter -> in_hub  Pi_{k-1}, enter in class k-1
//   v -> out_hub   Pi_{k+1}, out_hub -> exit Pi_{k+2}, exit in class k+3
struct Spike {
  Vertex head = kNoVertex;
  Vertex in_hub = kNoVertex;   // the single hub when undirected
  Vertex out_hub = kNoVertex;  // equals in_hub when undirected
  Vertex enter = kNoVertex;    // base where routes into the spike leave C
  Vertex exit = kNoVertex;     // base where routes out of the spike join C
  std::uint32_t k = 0;
};

struct ConnectivityCertificate {
  std::size_t n = 0;
  Pattern pattern{{1}, 1};
  bool directed = false;
  Step t = 0;
  std::vector<Vertex> cycle;
  std::vector<Color> colors;               // colors[k]: cycle[k] -> cycle[k+1]
  std::vector<Spike> spikes;
  std::vector<std::size_t> position;       // on C, or kOffCycle
  std::vector<std::size_t> spike_of;       // spike index of off-cycle vertices
  std::size_t bad = 0;                     // |BAD| as classified
  std::size_t relocated = 0;               // bad vertices moved to a class they fit instead
  std::size_t added = 0;                   // vertices given spikes by repair rounds
  std::size_t padding = 0;                 // |S_B|

  static constexpr std::size_t kOffCycle = static_cast<std::size_t>(-1);
  bool on_cycle(Vertex v) const { return position[v] != kOffCycle; }
};

enum class BuildStage { Precondition, Padding, Spikes, Rebalance, Matchings, Endpoints, Merge };
const char* to_string(BuildStage s) noexcept;

struct BuildFailure {
  BuildStage stage = BuildStage::Precondition;
  std::string reason;
  std::vector<Vertex> witness;
};

struct RouterConfig {
  std::optional<double> bad_threshold;  // default 0: no edge into the neighboring class
  std::size_t quota = 3;
  std::uint64_t merge_budget = 2'000'000;
  bool interleaved_layers = false;  // class v mod ell instead of blocks
  std::uint64_t seed = 0;           // S_B, rebalancing and merging
};

struct CertificateBuild {
  std::optional<ConnectivityCertificate> certificate;
  std::optional<BuildFailure> failure;
  std::size_t rounds = 0;
};

/// Builds at snapshot t. A graph with an isolated vertex, or ell < 2, fails at
/// Precondition. A bad vertex with a forward and a backward edge into some other class
/// moves to that class and needs no spike. Vertices left without class edges, or
/// left unmatched, get spikes in the next round (at most kPipelineRounds). A returned certificate always passes
/// verify_certificate; a failed self-check is a logic_error.
CertificateBuild build_certificate(const ColoredProcess& proc, const Pattern& p, Step t,
                                   const RouterConfig& cfg = {});

/// Pi-colored simple path u -> v through the certificate, at most |C| + 4 ell edges.
/// Throws ConfigError when u = v or either vertex is out of range.
PiPath route(const ConnectivityCertificate& cert, Vertex u, Vertex v);

/// Checks every certificate invariant against g and p, then routes `pairs` seeded
/// random pairs and checks each path edge by edge.
Verdict verify_certificate(const ConnectivityCertificate& cert, const ColoredGraph& g, const Pattern& p,
                           std::size_t pairs = 100, std::uint64_t seed = 0);

}  // namespace patternham
