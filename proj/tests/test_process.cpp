#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace patternham;

TEST_SUITE("process") {
  TEST_CASE("rng reference values") {
    // SplitMix64 seeded with 0 (published reference output)
    SplitMix64 sm(0);
    CHECK(sm.next() == 0xE220A8397B1DCDAFULL);
    CHECK(mix_seed(0, 0) == 0xE220A8397B1DCDAFULL);
    SplitMix64 sm2(1234567);
    sm2.next();
    CHECK(mix_seed(1234567, 1) == sm2.next());
    Xoshiro256 a(42), b(42);
    for (int i = 0; i < 10; ++i) CHECK(a() == b());
    for (int i = 0; i < 1000; ++i) CHECK(bounded(a, 7) < 7);
  }

  TEST_CASE("generate sizes and pair coverage") {
    auto u = generate(3, 2, 1, false);
    CHECK(u.edges.size() == 3);
    std::set<std::pair<Vertex, Vertex>> pairs;
    for (auto e : u.edges) pairs.insert({std::min(e.tail, e.head), std::max(e.tail, e.head)});
    CHECK(pairs.size() == 3);
    auto d = generate(3, 2, 1, true);
    CHECK(d.edges.size() == 6);
    std::set<std::pair<Vertex, Vertex>> arcs;
    for (auto e : d.edges) arcs.insert({e.tail, e.head});
    CHECK(arcs.size() == 6);
    CHECK(generate(30, 3, 77, false) == generate(30, 3, 77, false));
    CHECK_FALSE(generate(30, 3, 77, false) == generate(30, 3, 78, false));
    CHECK_THROWS_AS(generate(1, 2, 0, false), ConfigError);
    CHECK_THROWS_AS(generate(4, 0, 0, false), ConfigError);
    CHECK_THROWS_AS(generate(kMaxProcessVertices + 1, 1, 0, false), CapacityError);
  }

  TEST_CASE("generation is pinned bit-exactly") {
    // Guards the documented draw order; any change to it changes these values.
    auto p = generate(5, 3, 2024, false);
    std::ostringstream os;
    write_process(p, os);
    auto q = generate(5, 3, 2024, false);
    std::ostringstream os2;
    write_process(q, os2);
    CHECK(os.str() == os2.str());
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : os.str()) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
    MESSAGE("fnv1a of generate(5,3,2024) = ", h);
  }

  TEST_CASE("snapshot counts match a recount") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const bool directed = seed % 2;
      auto proc = generate(9, 3, seed, directed);
      Xoshiro256 rng(seed);
      const Step t = bounded(rng, proc.length() + 1);
      auto g = snapshot(proc, t);
      CHECK(g.edge_count() == t);
      for (Vertex v = 0; v < 9; ++v) {
        for (Color c = 1; c <= 3; ++c) {
          std::uint32_t tot = 0, in = 0, out = 0;
          for (Step i = 0; i < t; ++i) {
            const auto& e = proc.edges[i];
            if (e.color != c) continue;
            if (e.tail == v) ++out, ++tot;
            if (e.head == v) ++in, ++tot;
          }
          CHECK(g.count(v, c) == tot);
          CHECK(g.in_count(v, c) == in);
          CHECK(g.out_count(v, c) == out);
        }
      }
    }
    auto proc = generate(6, 2, 3, false);
    auto empty = snapshot(proc, 0);
    CHECK(empty.edge_count() == 0);
    CHECK(empty.min_degree() == 0);
    auto full = snapshot(proc, proc.length());
    CHECK(full.min_degree() == 5);
    CHECK_THROWS_AS(snapshot(proc, proc.length() + 1), std::out_of_range);
  }

  TEST_CASE("prefix property and incremental advance") {
    auto proc = generate(10, 2, 5, false);
    ColoredGraph inc(10, 2, false);
    for (Step t = 0; t <= proc.length(); ++t) {
      advance(inc, proc, t);
      auto fresh = snapshot(proc, t);
      CHECK(inc.edges() == fresh.edges());
    }
  }

  TEST_CASE("color_subgraph") {
    auto g = snapshot(generate(12, 3, 9, false), 40);
    std::vector<Color> all{1, 2, 3};
    CHECK(color_subgraph(g, all).edges() == g.edges());
    CHECK(color_subgraph(g, {}).edge_count() == 0);
    std::vector<Color> some{1, 3};
    std::size_t hist = 0;
    for (auto e : g.edges()) hist += e.color != 2;
    CHECK(color_subgraph(g, some).edge_count() == hist);
  }

  TEST_CASE("edge_color respects direction") {
    auto g = testkit::make_graph(3, 2, true, {{1, 2, 1}, {2, 3, 2}});
    CHECK(g.edge_color(0, 1) == Color{1});
    CHECK_FALSE(g.edge_color(1, 0).has_value());
    auto u = testkit::make_graph(3, 2, false, {{1, 2, 1}, {2, 3, 2}});
    CHECK(u.edge_color(1, 0) == Color{1});
    CHECK(u.edge_color(2, 1) == Color{2});
    CHECK_FALSE(u.edge_color(0, 2).has_value());
  }

  TEST_CASE("round trip and strict parsing") {
    for (bool directed : {false, true}) {
      auto p = generate(6, 3, 11, directed);
      std::stringstream ss;
      write_process(p, ss);
      CHECK(parse_process(ss) == p);
    }
    auto bad = [](const std::string& text) {
      std::istringstream in(text);
      return parse_process(in);
    };
    const std::string head = "pcham v1 undirected n=3 r=2 seed=0\n";
    CHECK_NOTHROW(bad(head + "1 2 1\n2 3 2\n3 1 1\n"));
    try {
      bad(head + "1 2 1\n5 5 1\n3 1 1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    try {
      bad(head + "1 2 1\n3 3 1\n3 1 1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("loop") != std::string::npos);
    }
    try {
      bad(head + "1 2 1\n2 1 2\n3 1 1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(bad(head + "1 2 3\n2 3 2\n3 1 1\n"), ParseError);
    CHECK_THROWS_AS(bad(head + "1 2 1\n2 3 2\n"), ParseError);
    CHECK_THROWS_AS(bad(head + "1 2 1\n2 3 2\n3 1 1\n1 2 1\n"), ParseError);
    CHECK_THROWS_AS(bad("pcham v2 undirected n=3 r=2 seed=0\n"), ParseError);
    CHECK_THROWS_AS(bad("pcham v1 undirected n=3 r=2\n"), ParseError);
    CHECK_THROWS_AS(bad(head + "1 2  1\n2 3 2\n3 1 1\n"), ParseError);
    CHECK_THROWS_AS(read_process_file("/nonexistent/nowhere.pcham"), IoError);
  }

  // Soft statistical checks: report, do not fail, outside 3 sigma.
  TEST_CASE("uniformity smoke checks") {
    const int trials = 10000;
    const std::size_t n = 5;
    const Step total = 10;
    std::vector<int> first(n * n, 0);
    int flips = 0;
    std::vector<int> hist(4, 0);
    for (int k = 0; k < trials; ++k) {
      auto p = generate(n, 3, mix_seed(1, k), false);
      auto e = p.edges[0];
      first[std::min(e.tail, e.head) * n + std::max(e.tail, e.head)]++;
      flips += e.tail > e.head;
      for (auto x : p.edges) hist[x.color]++;
    }
    const double mean = static_cast<double>(trials) / total;
    const double sigma = std::sqrt(trials * (1.0 / total) * (1 - 1.0 / total));
    int outliers = 0;
    for (int x : first)
      if (x && std::abs(x - mean) > 3 * sigma) ++outliers;
    if (outliers) MESSAGE("first-edge frequency outliers: ", outliers);
    const double half = trials / 2.0, sh = std::sqrt(trials * 0.25);
    if (std::abs(flips - half) > 3 * sh) MESSAGE("orientation imbalance: ", flips);
    double chi = 0;
    const double expect = trials * total / 3.0;
    for (int c = 1; c <= 3; ++c) chi += (hist[c] - expect) * (hist[c] - expect) / expect;
    if (chi > 9.21) MESSAGE("color histogram chi-square above the 99% band: ", chi);
    CHECK(outliers <= 2);
  }
}
