#include <numeric>

#include "doctest.h"
#include "patternham/verify.hpp"
#include "support.hpp"

using namespace patternham;

TEST_SUITE("verify") {
  TEST_CASE("pi_path_offset") {
    auto p = Pattern::parse("1,2,2,3");
    std::vector<Color> a{2, 3, 1, 2, 2, 3};
    // f_j colored Pi_{j+l}: f_1 = 2 = Pi_3, f_2 = 3 = Pi_4, f_3 = 1 = Pi_1
    CHECK(pi_path_offset(a, p) == std::size_t{2});
    std::vector<Color> b{1, 2, 2, 3, 1, 2};
    CHECK(pi_path_offset(b, p) == std::size_t{0});
    CHECK(pi_path_offset(std::vector<Color>{}, p) == std::size_t{0});
    CHECK_FALSE(pi_path_offset(std::vector<Color>{1, 1}, Pattern::parse("1,2")).has_value());
  }

  TEST_CASE("is_pi_cycle") {
    auto p = Pattern::parse("1,2");
    CHECK(is_pi_cycle(std::vector<Color>{1, 2, 1, 2}, p));
    CHECK(is_pi_cycle(std::vector<Color>{2, 1, 2, 1}, p));
    CHECK_FALSE(is_pi_cycle(std::vector<Color>{1, 2, 3, 1}, Pattern::parse("1,2,3")));
    CHECK(is_pi_cycle(std::vector<Color>{3, 2, 1}, Pattern::parse("1,2,3")));  // reverse direction
    CHECK_FALSE(is_pi_cycle(std::vector<Color>{}, p));
  }

  TEST_CASE("verify_pi_hamilton") {
    auto tri = testkit::make_graph(3, 3, false, {{1, 2, 1}, {2, 3, 2}, {3, 1, 3}});
    auto p = Pattern::parse("1,2,3");
    CHECK(verify_pi_hamilton(tri, p, std::vector<Vertex>{0, 1, 2}).ok);
    CHECK(verify_pi_hamilton(tri, p, std::vector<Vertex>{0, 2, 1}).ok);
    CHECK_FALSE(verify_pi_hamilton(tri, p, std::vector<Vertex>{0, 1}).ok);
    CHECK_FALSE(verify_pi_hamilton(tri, p, std::vector<Vertex>{0, 1, 1}).ok);
    auto dtri = testkit::make_graph(3, 3, true, {{1, 2, 1}, {2, 3, 2}, {3, 1, 3}});
    CHECK(verify_pi_hamilton(dtri, p, std::vector<Vertex>{0, 1, 2}).ok);
    auto v = verify_pi_hamilton(dtri, p, std::vector<Vertex>{0, 2, 1});
    CHECK_FALSE(v.ok);
    CHECK(v.reason.find("missing arc") != std::string::npos);
  }

  TEST_CASE("reachability on the crafted process") {
    auto proc = testkit::crafted4();
    auto p = Pattern::parse("1,2");
    auto empty = snapshot(proc, 0);
    auto r0 = pi_reachability(empty, p, 2);
    for (auto& row : r0) CHECK(std::count(row.begin(), row.end(), true) == 1);
    auto g3 = snapshot(proc, 3);
    auto r = pi_reachability(g3, p, 3);
    CHECK(r[0][0]);  // 4-3-2-1 with colors 1,2,1
    auto path = extract_pi_path(g3, p, 3, 0);
    REQUIRE(path.has_value());
    CHECK(path->vertices == std::vector<Vertex>{3, 2, 1, 0});
    CHECK(path->colors == std::vector<Color>{1, 2, 1});
    CHECK(extract_pi_path(g3, p, 1, 1)->vertices.empty());
    CHECK(is_pi_connected(g3, p));
    CHECK_FALSE(is_pi_connected(snapshot(proc, 2), p));
    CHECK_FALSE(is_pi_connected(empty, p));
    auto two = testkit::make_graph(2, 2, false, {{1, 2, 1}});
    CHECK(is_pi_connected(two, p));
  }

  TEST_CASE("walk reachability is not simple-path reachability") {
    // Pattern (1,1,2): from 1 the walk 1-2-3-1-... could revisit. A triangle of
    // color 1 plus a pendant color-2 edge: 1-2 (1), 2-3 (1), 3-1 (1), 1-4 (2).
    auto g = testkit::make_graph(4, 2, false, {{1, 2, 1}, {2, 3, 1}, {3, 1, 1}, {1, 4, 2}});
    auto p = Pattern::parse("1,1,2");
    CHECK(is_pi_connected(g, p) == testkit::oracle_pi_connected(g, p));
  }

  TEST_CASE("connectivity agrees with simple-path enumeration") {
    const char* pats[] = {"1", "1,2", "1,2,2,3", "1,1,2", "2,1,3"};
    int checked = 0;
    for (int k = 0; k < 300; ++k) {
      const bool directed = k % 3 == 0;
      auto p = Pattern::parse(pats[k % 5]);
      const std::size_t n = 2 + k % 6;
      const double density = 0.3 + 0.1 * (k % 7);
      auto g = testkit::random_graph(n, p.palette(), directed, density, mix_seed(3, k));
      const bool expect = testkit::oracle_pi_connected(g, p);
      CAPTURE(k);
      CHECK(pi_connected(g, p, Execution::Serial) == expect);
      CHECK(pi_connected(g, p, Execution::Parallel) == expect);
      ++checked;
    }
    CHECK(checked == 300);
  }

  TEST_CASE("extracted paths re-verify") {
    for (int k = 0; k < 60; ++k) {
      auto p = Pattern::parse(k % 2 ? "1,2" : "1,2,2,3");
      const bool directed = k % 4 == 1;
      auto g = testkit::random_graph(7, p.palette(), directed, 0.5, mix_seed(8, k));
      auto reach = testkit::oracle_simple_reach(g, p);
      for (Vertex u = 0; u < 7; ++u) {
        for (Vertex v = 0; v < 7; ++v) {
          auto path = extract_pi_path(g, p, u, v);
          CHECK(path.has_value() == (u == v || reach[u * 7 + v]));
          if (!path || u == v) continue;
          CHECK(path->vertices.front() == u);
          CHECK(path->vertices.back() == v);
          CHECK(pi_path_offset(path->colors, p) == path->offset);
          for (std::size_t i = 0; i + 1 < path->vertices.size(); ++i) {
            CHECK(g.edge_color(path->vertices[i], path->vertices[i + 1]) == path->colors[i]);
          }
          auto vs = path->vertices;
          std::sort(vs.begin(), vs.end());
          CHECK(std::adjacent_find(vs.begin(), vs.end()) == vs.end());
        }
      }
    }
  }

  TEST_CASE("monotone under edge addition and invariant under relabeling") {
    auto p = Pattern::parse("1,2");
    for (int k = 0; k < 20; ++k) {
      auto proc = generate(8, 2, mix_seed(12, k), k % 2);
      bool prev = false;
      for (Step t = 0; t <= proc.length(); ++t) {
        const bool now = pi_connected(snapshot(proc, t), p);
        CHECK((!prev || now));
        prev = now;
      }
      // relabel vertices
      Xoshiro256 rng(k);
      std::vector<Vertex> perm(8);
      std::iota(perm.begin(), perm.end(), 0);
      shuffle(perm, rng);
      const Step t = proc.length() / 2;
      auto g = snapshot(proc, t);
      ColoredGraph h(8, 2, proc.directed);
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
        auto e = g.edges()[i];
        h.add_edge({perm[e.tail], perm[e.head], e.color}, g.steps()[i]);
      }
      CHECK(pi_connected(g, p) == pi_connected(h, p));
    }
  }
}
