// Serial vs OpenMP connectivity, the exact finder and the pipeline.
#include <benchmark/benchmark.h>

#include "patternham/constructive.hpp"
#include "patternham/hamilton.hpp"
#include "patternham/hitting.hpp"
#include "patternham/verify.hpp"

using namespace patternham;

namespace {

ColoredGraph at_min_degree(std::size_t n, bool directed, std::uint64_t seed) {
  auto proc = generate(n, 2, seed, directed);
  return snapshot(proc, tau_min_degree(proc));
}

void BM_connected(benchmark::State& st, Execution ex, bool directed) {
  const auto g = at_min_degree(static_cast<std::size_t>(st.range(0)), directed, 1);
  const auto p = Pattern::parse("1,2");
  for (auto _ : st) benchmark::DoNotOptimize(pi_connected(g, p, ex));
  st.SetComplexityN(st.range(0));
}

void BM_tau_connected(benchmark::State& st, Execution ex) {
  const auto proc = generate(static_cast<std::size_t>(st.range(0)), 2, 3, false);
  const auto p = Pattern::parse("1,2");
  for (auto _ : st) benchmark::DoNotOptimize(tau_pi_connected(proc, p, ex));
}

void BM_find(benchmark::State& st) {
  const auto proc = generate(static_cast<std::size_t>(st.range(0)), 2, 5, false);
  const auto p = Pattern::parse("1,2");
  const auto g = snapshot(proc, *tau_fit(proc, p));
  for (auto _ : st) benchmark::DoNotOptimize(find_pi_hamilton(g, p));
}

void BM_pipeline(benchmark::State& st) {
  const auto proc = generate(static_cast<std::size_t>(st.range(0)), 2, 7, false);
  const auto p = Pattern::parse("1,2");
  for (auto _ : st) benchmark::DoNotOptimize(run_pipeline(proc, p).success);
}

}  // namespace

BENCHMARK_CAPTURE(BM_connected, serial, Execution::Serial, false)->Range(64, 2048);
BENCHMARK_CAPTURE(BM_connected, parallel, Execution::Parallel, false)->Range(64, 2048);
BENCHMARK_CAPTURE(BM_connected, serial_directed, Execution::Serial, true)->Range(64, 1024);
BENCHMARK_CAPTURE(BM_connected, parallel_directed, Execution::Parallel, true)->Range(64, 1024);
BENCHMARK_CAPTURE(BM_tau_connected, serial, Execution::Serial)->Arg(200);
BENCHMARK_CAPTURE(BM_tau_connected, parallel, Execution::Parallel)->Arg(200);
BENCHMARK(BM_find)->Arg(24)->Arg(48);
BENCHMARK(BM_pipeline)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
