#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "ionmap/scheduler.hpp"

using namespace ionmap;

static void BM_Preprocess(benchmark::State& state) {
    Program prog = bench::layered_circuit(static_cast<int>(state.range(0)),
                                          static_cast<int>(state.range(1)), 7);
    Qidg base = Qidg::build(prog, FabricConfig{});
    base.compute_sibling_sets();
    for (auto _ : state) {
        Qidg g = base;
        preprocess(g);
        benchmark::DoNotOptimize(g.edges().size());
    }
    state.SetLabel(std::to_string(base.size()) + " instructions");
}
BENCHMARK(BM_Preprocess)->Args({8, 6})->Args({12, 10})->Args({16, 16});

static void BM_FdsSchedule(benchmark::State& state) {
    Program prog = bench::layered_circuit(static_cast<int>(state.range(0)),
                                          static_cast<int>(state.range(1)), 11);
    Qidg g = Qidg::build(prog, FabricConfig{});
    preprocess(g);
    int cap = static_cast<int>(state.range(2));
    for (auto _ : state) {
        Schedule s = fds_schedule(g, cap);
        benchmark::DoNotOptimize(s.num_levels);
    }
    state.SetLabel(std::to_string(g.size()) + " instructions, cap " +
                   std::to_string(cap));
}
BENCHMARK(BM_FdsSchedule)
    ->Args({8, 6, 4})
    ->Args({12, 10, 6})
    ->Args({16, 16, 8})
    ->Args({16, 16, 3});

static void BM_ExactOracle(benchmark::State& state) {
    Program prog = bench::layered_circuit(4, 5, 3); // 10 instructions
    Qidg g = Qidg::build(prog, FabricConfig{});
    g.compute_sibling_sets();
    for (auto _ : state)
        benchmark::DoNotOptimize(exact_oracle(g, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ExactOracle)->Arg(2)->Arg(4);
