#include <benchmark/benchmark.h>

#include "wnucsp/format.hpp"
#include "wnucsp/harness.hpp"
#include "wnucsp/solver.hpp"

using namespace wnucsp;

static void BM_Z4Example(benchmark::State& state) {
  const InstanceFile f = read_instance_file(std::string(WNUCSP_TEST_DATA) + "/z4_example.csp");
  for (auto _ : state) {
    // A fresh algebra each round so the per-algebra caches start cold.
    const SolveOutcome out = solve(f.to_instance());
    benchmark::DoNotOptimize(out.assignment);
  }
}
BENCHMARK(BM_Z4Example)->Unit(benchmark::kMillisecond);

static void BM_Differential(benchmark::State& state, const char* name) {
  GenParams p = preset(name);
  p.variables = 6;
  p.constraints = 6;
  for (auto _ : state) {
    const DiffReport r = differential_test(static_cast<std::size_t>(state.range(0)), p);
    benchmark::DoNotOptimize(r.agreements);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Differential, minority2, "minority2")->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Differential, dd3, "dd3")->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Differential, z4sum5, "z4sum5")->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_SubuniverseClosure(benchmark::State& state) {
  const Algebra z4(ops::sum_mod(4, 5));
  const Algebra* coords[] = {&z4, &z4, &z4};
  const std::vector<Tuple> gens{{0, 1, 0}, {1, 0, 3}, {2, 2, 1}};
  for (auto _ : state) {
    const GeneratedSubuniverse g = generate_subuniverse(coords, gens);
    benchmark::DoNotOptimize(g.tuples.size());
  }
}
BENCHMARK(BM_SubuniverseClosure);

BENCHMARK_MAIN();
