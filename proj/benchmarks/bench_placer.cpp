#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "ionmap/placer.hpp"

using namespace ionmap;

static void BM_QuadraticSolve(benchmark::State& state) {
    Program prog = bench::layered_circuit(static_cast<int>(state.range(0)),
                                          static_cast<int>(state.range(1)), 23);
    Qidg g = Qidg::build(prog, FabricConfig{});
    preprocess(g);
    Schedule s = fds_schedule(g, 8);
    g.levelize(s.num_levels);

    QuadraticSystem sys;
    sys.free_count = g.size();
    for (const QidgEdge& e : g.edges()) {
        int slack = g.node(e.to).alap - g.node(e.to).asap;
        sys.nets.emplace_back(
            e.from, e.to, net_weight(slack, s.level[e.to] - s.level[e.from], 100.0));
    }
    for (int i = 0; i < g.size(); i += 4)
        sys.anchors.emplace_back(i, static_cast<double>(i % 22), 1.0);
    for (auto _ : state) {
        auto x = sys.solve(1e-6);
        benchmark::DoNotOptimize(x.data());
    }
    state.SetLabel(std::to_string(g.size()) + " unknowns");
}
BENCHMARK(BM_QuadraticSolve)->Args({16, 12})->Args({24, 24})->Args({32, 40});

static void BM_PlaceInstructions(benchmark::State& state) {
    Program prog = bench::layered_circuit(12, static_cast<int>(state.range(0)), 5);
    FabricConfig cfg;
    cfg.ulb_n = 2;
    Fabric fabric(TemplateLayout::builtin(), cfg);
    Qidg g = Qidg::build(prog, cfg);
    preprocess(g);
    Schedule s = fds_schedule(g, 6);
    for (auto _ : state) {
        Placement p = place_instructions(g, s, fabric, PlacerConfig{}, 1);
        benchmark::DoNotOptimize(p.instruction_well.data());
    }
    state.SetLabel(std::to_string(g.size()) + " instructions");
}
BENCHMARK(BM_PlaceInstructions)->Arg(4)->Arg(8)->Arg(14);
