#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "ionmap/emulator.hpp"
#include "ionmap/flow.hpp"

using namespace ionmap;

static void BM_DynamicRoute(benchmark::State& state) {
    Program prog = bench::layered_circuit(12, static_cast<int>(state.range(0)), 9);
    FabricConfig cfg;
    cfg.ulb_n = static_cast<int>(state.range(1));
    Fabric fabric(TemplateLayout::builtin(), cfg);
    Qidg g = Qidg::build(prog, cfg);
    preprocess(g);
    Schedule s = fds_schedule(g, 6);
    Placement p = place_instructions(g, s, fabric, PlacerConfig{}, 1);
    Qidg gl = g;
    gl.levelize(p.schedule.num_levels);
    for (auto _ : state) {
        RouteResult r = dynamic_route(gl, p, fabric);
        benchmark::DoNotOptimize(r.total_latency_us);
    }
    state.SetLabel(std::to_string(g.size()) + " instructions, " +
                   std::to_string(fabric.well_count()) + " wells");
}
BENCHMARK(BM_DynamicRoute)->Args({6, 2})->Args({12, 2})->Args({12, 3});

static void BM_ValidateStream(benchmark::State& state) {
    Program prog = bench::layered_circuit(12, 10, 9);
    FabricConfig cfg;
    cfg.ulb_n = 2;
    Fabric fabric(TemplateLayout::builtin(), cfg);
    FlowConfig flow_cfg;
    flow_cfg.fast = true;
    FlowResult result = map_circuit(prog, fabric, flow_cfg);
    for (auto _ : state) {
        ValidationReport rep =
            validate_stream(result.route.stream, fabric, result.graph);
        benchmark::DoNotOptimize(rep.ok);
    }
    state.SetLabel(std::to_string(result.route.stream.commands.size()) +
                   " commands");
}
BENCHMARK(BM_ValidateStream);

static void BM_FullFlow(benchmark::State& state) {
    Program prog = bench::layered_circuit(10, 8, 13);
    FabricConfig cfg;
    cfg.ulb_n = 2;
    Fabric fabric(TemplateLayout::builtin(), cfg);
    FlowConfig flow_cfg;
    flow_cfg.fast = state.range(0) == 1;
    for (auto _ : state) {
        FlowResult r = map_circuit(prog, fabric, flow_cfg);
        benchmark::DoNotOptimize(r.report.total_latency_us);
    }
    state.SetLabel(flow_cfg.fast ? "default candidate" : "full cap sweep");
}
BENCHMARK(BM_FullFlow)->Arg(1)->Arg(0);
