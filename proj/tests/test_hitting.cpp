#include "doctest.h"
#include "patternham/hitting.hpp"
#include "support.hpp"

using namespace patternham;

namespace {

// From-scratch recomputation at every step.
std::optional<Step> scan_fit(const ColoredProcess& proc, const Pattern& p) {
  return first_time_linear(proc, [&](const ColoredGraph& g) {
    for (Vertex v = 0; v < g.vertex_count(); ++v)
      if (!g.fits_at(v, p)) return false;
    return true;
  });
}

}  // namespace

TEST_SUITE("hitting") {
  TEST_CASE("crafted process hitting times") {
    auto proc = testkit::crafted4();
    auto p = Pattern::parse("1,2");
    CHECK(tau_min_degree(proc, 1) == 3);
    CHECK(tau_fit(proc, p) == Step{4});
    CHECK(tau_pi_connected(proc, p) == Step{3});
    auto ham = tau_pi_hamilton(proc, p);
    CHECK(ham.resolution == Resolution::Exact);
    CHECK(ham.value == 4);
    auto rep = hitting_report(proc, p);
    CHECK(rep.tau_min_degree_1 == 3);
    CHECK(rep.tau_pi_connected == Step{3});
  }

  TEST_CASE("min degree targets") {
    // star at vertex 1 first: the last leaf appears at step n-1
    ColoredProcess star;
    star.n = 5;
    star.r = 1;
    for (Vertex b = 1; b < 5; ++b) star.edges.push_back({0, b, 1});
    for (Vertex a = 1; a < 5; ++a)
      for (Vertex b = a + 1; b < 5; ++b) star.edges.push_back({a, b, 1});
    CHECK(tau_min_degree(star, 1) == 4);
    CHECK(tau_min_degree(star, 4) == star.length());
    CHECK_THROWS_AS(tau_min_degree(star, 5), ConfigError);
    auto d = generate(7, 2, 3, true);
    CHECK(tau_min_degree(d, 6) == d.length());
  }

  TEST_CASE("single-color pattern needs two edges of that color") {
    auto proc = generate(9, 1, 6, false);
    auto t = tau_fit(proc, Pattern::parse("1"));
    CHECK(t == tau_min_degree(proc, 2));
  }

  TEST_CASE("incremental trackers equal from-scratch oracles") {
    const char* pats[] = {"1,2", "1,2,2,3", "1", "1,1,2"};
    for (int k = 0; k < 100; ++k) {
      auto p = Pattern::parse(pats[k % 4]);
      auto proc = generate(8, p.palette(), mix_seed(31, k), k % 3 == 0);
      CHECK(tau_fit(proc, p) == scan_fit(proc, p));
      auto deg = first_time_linear(proc, [](const ColoredGraph& g) { return g.min_degree() >= 1; });
      CHECK(deg == tau_min_degree(proc, 1));
    }
  }

  TEST_CASE("first_time matches linear scan") {
    auto proc = generate(7, 2, 9, false);
    auto five = [](const ColoredGraph& g) { return g.edge_count() >= 5; };
    CHECK(first_time(proc, five) == Step{5});
    CHECK(first_time(proc, [](const ColoredGraph&) { return true; }) == Step{0});
    CHECK_FALSE(first_time(proc, [](const ColoredGraph&) { return false; }).has_value());
    for (Step star = 0; star <= proc.length(); ++star) {
      auto pred = [star](const ColoredGraph& g) { return g.edge_count() >= star; };
      CHECK(first_time(proc, pred) == star);
      CHECK(first_time_linear(proc, pred) == star);
    }
  }

  TEST_CASE("binary searches agree with linear scans for n <= 10") {
    auto p = Pattern::parse("1,2");
    for (int k = 0; k < 30; ++k) {
      const bool directed = k % 2;
      auto proc = generate(6 + 2 * (k % 3), 2, mix_seed(77, k), directed);
      auto conn = first_time_linear(proc, [&](const ColoredGraph& g) { return pi_connected(g, p); });
      CHECK(tau_pi_connected(proc, p) == conn);
      auto ham = first_time_linear(
          proc, [&](const ColoredGraph& g) { return find_pi_hamilton(g, p).status == SearchStatus::Found; });
      auto got = tau_pi_hamilton(proc, p);
      if (ham) {
        CHECK(got.resolution == Resolution::Exact);
        CHECK(got.value == *ham);
        CHECK(*tau_fit(proc, p) <= got.value);
      } else {
        CHECK(got.resolution == Resolution::Never);
      }
      if (conn) CHECK(tau_min_degree(proc, 1) <= *conn);
    }
  }

  TEST_CASE("color-2 edges all at one vertex") {
    // n=4, Pi=(1,2): every color-2 edge meets vertex 1, so no vertex other than 1
    // can see two color-2 edges, and a Hamilton cycle needs two disjoint 2-edges.
    ColoredProcess proc;
    proc.n = 4;
    proc.r = 2;
    proc.edges = {{0, 1, 2}, {0, 2, 2}, {0, 3, 2}, {1, 2, 1}, {2, 3, 1}, {1, 3, 1}};
    auto got = tau_pi_hamilton(proc, Pattern::parse("1,2"));
    CHECK(got.resolution == Resolution::Never);
    CHECK_FALSE(brute_force_pi_hamilton(snapshot(proc, proc.length()), Pattern::parse("1,2")).has_value());
  }

  TEST_CASE("walk-only pairs near tau_1 settle quickly") {
    // This process once sent the exact simple-path fallback into a full enumeration.
    auto proc = generate(50, 2, mix_seed(mix_seed(20240601, 50), 62), false);
    auto p = Pattern::parse("1,2");
    auto tc = tau_pi_connected(proc, p, Execution::Serial);
    REQUIRE(tc.has_value());
    CHECK(*tc >= tau_min_degree(proc));
    CHECK(is_pi_connected(snapshot(proc, *tc), p, Execution::Serial));
    CHECK_FALSE(is_pi_connected(snapshot(proc, *tc - 1), p, Execution::Serial));
  }

  TEST_CASE("requires ell | n") {
    auto proc = generate(5, 2, 1, false);
    CHECK_THROWS_AS(tau_pi_hamilton(proc, Pattern::parse("1,2")), ConfigError);
  }
}
