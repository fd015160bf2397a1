#include <cmath>
#include <sstream>

#include "doctest.h"
#include "patternham/experiment.hpp"
#include "patternham/hitting.hpp"

using namespace patternham;

namespace {

std::string csv(const ExperimentSpec& spec) {
  std::ostringstream out;
  write_csv(spec, run_experiment(spec), out);
  return out.str();
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("wilson interval") {
    // 8 of 10 at 95%: (0.4902, 0.9433) by the closed form
    auto w = wilson(8, 10);
    CHECK(w.value == doctest::Approx(0.8));
    CHECK(w.lo == doctest::Approx(0.4902).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.9433).epsilon(1e-3));
    auto all = wilson(20, 20);
    CHECK(all.hi == doctest::Approx(1.0));
    CHECK(all.lo < 1.0);
    auto none = wilson(0, 0);
    CHECK(none.lo == 0.0);
    CHECK(none.hi == 1.0);
  }

  TEST_CASE("snapshot sizes") {
    const double n = 100;
    CHECK(snapshot_size(Suite::CorConn, 100, 2, 1, 0.5) == std::llround(n * (std::log(n) + 0.5) / 2));
    CHECK(snapshot_size(Suite::CorConnDirected, 100, 2, 1, 0.5) == std::llround(n * (std::log(n) + 0.5)));
    CHECK(snapshot_size(Suite::CorHam, 100, 3, 2, 0.5) == std::llround(3 * n * (std::log(n) + 0.5) / 4));
    CHECK(snapshot_size(Suite::CorConn, 10, 2, 1, 1e6) == 45);
    CHECK(snapshot_size(Suite::CorConn, 10, 2, 1, -1e6) == 0);
  }

  TEST_CASE("validation") {
    ExperimentSpec s;
    s.n = {13};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.n = {};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.n = {12};
    s.trials = 0;
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.trials = 1;
    CHECK_NOTHROW(validate(s));
    CHECK(parse_suite("cor_conn_directed") == Suite::CorConnDirected);
    CHECK_FALSE(parse_suite("thm9"));
  }

  TEST_CASE("rows match a direct computation") {
    ExperimentSpec s;
    s.suite = Suite::Thm2;
    s.n = {16, 24};
    s.trials = 5;
    s.base_seed = 9;
    auto res = run_experiment(s);
    REQUIRE(res.rows.size() == 10);
    CHECK(res.complete);
    for (const auto& row : res.rows) {
      CHECK(row.seed == trial_seed(9, row.n, row.trial));
      auto proc = generate(row.n, 2, row.seed, false);
      CHECK(row.tau_1 == tau_min_degree(proc));
      CHECK(row.tau_conn == tau_pi_connected(proc, s.pattern, Execution::Serial));
      CHECK(row.equal == (row.tau_conn == std::optional<Step>(row.tau_1)));
    }
    REQUIRE(res.cells.size() == 2);
    for (const auto& cell : res.cells) {
      std::size_t eq = 0;
      for (const auto& row : res.rows) eq += row.n == cell.n && row.equal;
      CHECK(cell.trials == 5);
      CHECK(cell.equal.hits == eq);
      CHECK(cell.equal.value == doctest::Approx(eq / 5.0));
    }
  }

  TEST_CASE("output does not depend on the parallel width") {
    ExperimentSpec s;
    s.suite = Suite::Thm1;
    s.n = {12};
    s.trials = 6;
    s.timing = false;
    s.threads = 1;
    const auto one = csv(s);
    s.threads = 4;
    CHECK(csv(s) == one);
    CHECK(one.rfind("# patternham-csv v1 suite=thm1", 0) == 0);
  }

  TEST_CASE("an interrupt before the start leaves an incomplete result") {
    ExperimentSpec s;
    s.n = {12};
    s.trials = 3;
    std::atomic<bool> stop{true};
    auto res = run_experiment(s, &stop);
    CHECK_FALSE(res.complete);
    for (const auto& row : res.rows) CHECK_FALSE(row.done);
  }

  TEST_CASE("corollary fractions are consistent") {
    ExperimentSpec s;
    s.suite = Suite::CorConn;
    s.n = {40};
    s.c = {-1.0, 2.0};
    s.trials = 8;
    auto res = run_experiment(s);
    REQUIRE(res.cells.size() == 2);
    for (const auto& cell : res.cells) {
      // Pi-connectivity needs minimum degree 1
      CHECK(cell.pi_connected.hits <= cell.min_degree_ok.hits);
      CHECK(cell.limit == doctest::Approx(std::exp(-std::exp(-cell.c))));
    }
    for (const auto& row : res.rows) {
      if (row.pi_connected) CHECK(row.min_degree_ok);
    }
  }
}
