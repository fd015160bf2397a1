#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "support.hpp"

using namespace patternham;

namespace {

std::vector<std::uint32_t> counts_of(int r, std::initializer_list<std::pair<int, int>> kv) {
  std::vector<std::uint32_t> c(r + 1, 0);
  for (auto [k, v] : kv) c[k] = v;
  return c;
}

}  // namespace

TEST_SUITE("pattern") {
  TEST_CASE("cyclic index wraps to ell, never 0") {
    CHECK(cyclic_index(5, 4) == 1);
    CHECK(cyclic_index(4, 4) == 4);
    CHECK(cyclic_index(1, 1) == 1);
    CHECK(cyclic_index(9, 4) == 1);
  }

  TEST_CASE("parse and validation") {
    auto p = Pattern::parse("1,2,2,3");
    CHECK(p.length() == 4);
    CHECK(p.palette() == 3);
    CHECK(p.at(5) == 1);
    CHECK(p.at(4) == 3);
    CHECK(p.to_string() == "1,2,2,3");
    CHECK_THROWS_AS(Pattern::parse("1,,2"), std::invalid_argument);
    CHECK_THROWS_AS(Pattern::parse("1;2"), std::invalid_argument);
    CHECK_THROWS_AS(Pattern::parse("1,3"), std::invalid_argument);  // color 2 missing
    CHECK_THROWS_AS(Pattern::parse("1,2", 3), std::invalid_argument);
    CHECK_THROWS_AS(Pattern::parse("0"), std::invalid_argument);
  }

  TEST_CASE("demand examples") {
    auto d = demand(Pattern::parse("1,2,2,3"));
    CHECK(d.demand == 2);
    CHECK(d.witness == std::vector<std::size_t>{2, 4});
    CHECK(d.label_set == std::vector<Color>{2, 3});

    auto one = demand(Pattern::parse("1"));
    CHECK(one.demand == 1);
    CHECK(one.witness == std::vector<std::size_t>{1});

    auto two = demand(Pattern::parse("1,1,2"));
    CHECK(two.demand == 1);
    CHECK(two.witness == std::vector<std::size_t>{1, 2});
    CHECK(two.label_set == std::vector<Color>{1});
  }

  TEST_CASE("directed demand examples") {
    auto d = directed_demand(Pattern::parse("1,2"));
    CHECK(d.demand == 2);
    CHECK(d.directed_label_set.size() == 2);
    // (1) has pair {(1,+),(1,-)} with labels (1,out),(1,in): one label suffices
    CHECK(directed_demand(Pattern::parse("1")).demand == 1);
  }

  TEST_CASE("demand capacity guard") {
    std::vector<Color> c(25, 1);
    Pattern p(c, 1);
    CHECK_THROWS_AS(demand(p), CapacityError);
    CHECK_THROWS_AS(directed_demand(Pattern(std::vector<Color>(13, 1), 1)), CapacityError);
    CHECK_NOTHROW(demand(Pattern(std::vector<Color>(12, 1), 1), 12));
  }

  TEST_CASE("demand agrees with the label-subset oracle on random patterns") {
    Xoshiro256 g(17);
    for (int trial = 0; trial < 600; ++trial) {
      auto p = testkit::random_pattern(g, 10, 5);
      auto d = demand(p);
      CAPTURE(p.to_string());
      CHECK(d.demand == testkit::oracle_demand(p));
      CHECK(d.demand >= 1);
      CHECK(d.demand <= p.palette());
      CHECK(is_position_cover(p, d.witness));
      CHECK(static_cast<int>(d.label_set.size()) == d.demand);
      if (p.length() <= 6) {
        auto dd = directed_demand(p);
        CHECK(dd.demand == testkit::oracle_directed_demand(p));
        CHECK(dd.demand <= 2 * p.palette());
        CHECK(static_cast<int>(dd.directed_label_set.size()) == dd.demand);
      }
    }
  }

  TEST_CASE("cover family is upward closed and contains [ell]") {
    Xoshiro256 g(5);
    for (int trial = 0; trial < 100; ++trial) {
      auto p = testkit::random_pattern(g, 8, 4);
      const std::size_t ell = p.length();
      std::vector<std::size_t> all(ell);
      std::iota(all.begin(), all.end(), 1);
      CHECK(is_position_cover(p, all));
      for (std::uint32_t mask = 0; mask < (1u << ell); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < ell; ++i)
          if (mask >> i & 1) s.push_back(i + 1);
        if (!is_position_cover(p, s)) continue;
        for (std::size_t extra = 0; extra < ell; ++extra) {
          if (mask >> extra & 1) continue;
          auto t = s;
          t.push_back(extra + 1);
          CHECK(is_position_cover(p, t));
        }
      }
    }
  }

  TEST_CASE("fits examples") {
    auto p = Pattern::parse("1,2,2,3");
    CHECK(fits(counts_of(3, {{2, 2}}), p));
    CHECK(fits(counts_of(3, {{1, 1}, {3, 1}}), p));
    CHECK_FALSE(fits(counts_of(3, {{1, 5}}), p));
    CHECK_FALSE(fits(counts_of(2, {{1, 1}}), Pattern::parse("1,2")));
    CHECK_FALSE(fits(counts_of(1, {{1, 1}}), Pattern::parse("1")));
    CHECK(fits(counts_of(1, {{1, 2}}), Pattern::parse("1")));
  }

  TEST_CASE("fits_directed examples") {
    auto p = Pattern::parse("1,2");
    CHECK(fits_directed(counts_of(2, {{1, 1}}), counts_of(2, {{2, 1}}), p));
    CHECK_FALSE(fits_directed(counts_of(2, {{2, 3}}), counts_of(2, {{2, 3}}), p));
    CHECK(fits_directed(counts_of(1, {{1, 1}}), counts_of(1, {{1, 1}}), Pattern::parse("1")));
  }

  TEST_CASE("fits properties: monotone, safe certificate, relabeling") {
    Xoshiro256 g(99);
    for (int trial = 0; trial < 400; ++trial) {
      auto p = testkit::random_pattern(g, 8, 4);
      const int r = p.palette();
      std::vector<std::uint32_t> c(r + 1), cin(r + 1), cout(r + 1);
      for (int k = 1; k <= r; ++k) {
        c[k] = bounded(g, 3);
        cin[k] = bounded(g, 2);
        cout[k] = bounded(g, 2);
      }
      auto bigger = c, bin = cin, bout = cout;
      const int k = 1 + static_cast<int>(bounded(g, r));
      ++bigger[k];
      ++bin[k];
      ++bout[1 + bounded(g, r)];
      if (fits(c, p)) CHECK(fits(bigger, p));
      if (fits_directed(cin, cout, p)) CHECK(fits_directed(bin, bout, p));

      // a cover whose labels are all absent certifies non-fit
      auto d = demand(p);
      bool absent = true;
      for (Color lab : d.label_set) absent = absent && c[lab] == 0;
      if (absent) CHECK_FALSE(fits(c, p));

      // relabel colors by a random permutation
      std::vector<Color> perm(r + 1);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = r; i > 1; --i) std::swap(perm[i], perm[1 + bounded(g, i)]);
      std::vector<Color> pc;
      for (Color x : p.colors()) pc.push_back(perm[x]);
      Pattern q(pc, r);
      std::vector<std::uint32_t> qc(r + 1);
      for (int x = 1; x <= r; ++x) qc[perm[x]] = c[x];
      CHECK(fits(c, p) == fits(qc, q));
      CHECK(demand(p).demand == demand(q).demand);
    }
  }
}
