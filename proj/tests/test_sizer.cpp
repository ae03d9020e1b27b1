#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ionmap/sizer.hpp"

using namespace ionmap;

TEST_CASE("closed-form cost on the worked numbers") {
    // L_T = L_Tdag = 2, L_CNOT = 3, L_H = 1, L_r1 = 1, n = 2
    CHECK(toffoli_cost(2, 2, 3, 1, 2, 1) == 53.0);
    // no inter-block routing: pure gate sum
    CHECK(toffoli_cost(5, 7, 11, 13, 3, 0) == 2 * 5 + 2 * 7 + 6 * 11 + 13);
}

TEST_CASE("ledger rows reproduce the per-operation cost terms") {
    auto rows = toffoli_ledger(2, 2, 3, 1, 2, 1);
    REQUIRE(rows.size() == 15);
    bool found = false;
    for (const auto& row : rows)
        if (row.slot == "2") {
            CHECK(row.instruction == "CNOT q1,q2");
            CHECK(row.cost == 3 + 2 * 2 * 1); // L_CNOT + 2 n L_r1
            CHECK(row.critical);
            found = true;
        }
    CHECK(found);
    // the four off-path rows are excluded from the critical sum
    int non_critical = 0;
    for (const auto& row : rows)
        if (!row.critical) {
            ++non_critical;
            CHECK((row.slot == "7.b" || row.slot == "9.a" || row.slot == "10.a" ||
                   row.slot == "10.c"));
        }
    CHECK(non_critical == 4);
}

TEST_CASE("critical ledger rows sum to the closed form for random tables") {
    std::mt19937_64 rng(55);
    std::uniform_int_distribution<int> lat(1, 1000000);
    std::uniform_int_distribution<int> size(1, 20);
    for (int trial = 0; trial < 1000; ++trial) {
        double l_t = lat(rng), l_tdag = lat(rng), l_cnot = lat(rng), l_h = lat(rng);
        double l_r1 = lat(rng);
        int n = size(rng);
        double closed = toffoli_cost(l_t, l_tdag, l_cnot, l_h, n, l_r1);
        double sum = 0.0;
        for (const auto& row : toffoli_ledger(l_t, l_tdag, l_cnot, l_h, n, l_r1))
            if (row.critical) sum += row.cost;
        CHECK(sum == closed); // integer-valued latencies: exact in double
    }
}

TEST_CASE("best size on the synthetic three-point table") {
    OpLatencyTable table;
    table.sizes = {4, 6, 8};
    table.rows["OP"] = {{true, 100}, {true, 60}, {true, 55}};
    WorkloadModel w;
    w.weights = {{"OP", 1.0}};
    w.d_r_avg = 10.0;
    w.l_r1_us = 1.0; // n * l_r1 * d_r_avg = 10 n
    SizeChoice choice = best_size(table, w);
    REQUIRE(choice.objectives.size() == 3);
    CHECK(choice.objectives[0].objective == 140.0);
    CHECK(choice.objectives[1].objective == 120.0);
    CHECK(choice.objectives[2].objective == 135.0);
    CHECK(choice.n_best == 6);
}

TEST_CASE("degenerate workloads") {
    OpLatencyTable table;
    table.sizes = {2, 3, 5};
    table.rows["OP"] = {{false, 0}, {true, 80}, {true, 10}};

    WorkloadModel zero;
    zero.d_r_avg = 1.0;
    zero.l_r1_us = 1.0; // objective = n; smallest feasible wins
    CHECK(best_size(table, zero).n_best == 2);

    WorkloadModel weighted;
    weighted.weights = {{"OP", 1.0}};
    weighted.d_r_avg = 1.0;
    weighted.l_r1_us = 1.0; // infeasible n=2 excluded despite small n
    CHECK(best_size(table, weighted).n_best == 5);

    OpLatencyTable single;
    single.sizes = {7};
    single.rows["OP"] = {{true, 42}};
    CHECK(best_size(single, weighted).n_best == 7);

    OpLatencyTable dead;
    dead.sizes = {1, 2};
    dead.rows["OP"] = {{false, 0}, {false, 0}};
    CHECK_THROWS_WITH_AS(best_size(dead, weighted),
                         doctest::Contains("NoFeasibleSize"), Error);
}

TEST_CASE("ties break toward the smaller size and scaling keeps the argmin") {
    OpLatencyTable table;
    table.sizes = {2, 4};
    table.rows["OP"] = {{true, 40}, {true, 20}};
    WorkloadModel w;
    w.weights = {{"OP", 1.0}};
    w.d_r_avg = 10.0;
    w.l_r1_us = 1.0; // objectives 60 and 60: tie
    CHECK(best_size(table, w).n_best == 2);

    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> lat(1, 100000);
    for (int trial = 0; trial < 50; ++trial) {
        OpLatencyTable t2;
        t2.sizes = {1, 2, 3, 4};
        t2.rows["A"] = {{true, lat(rng)}, {true, lat(rng)}, {true, lat(rng)},
                        {true, lat(rng)}};
        t2.rows["B"] = {{true, lat(rng)}, {true, lat(rng)}, {true, lat(rng)},
                        {true, lat(rng)}};
        WorkloadModel base;
        base.weights = {{"A", 2.0}, {"B", 3.0}};
        base.d_r_avg = 5.0;
        base.l_r1_us = lat(rng);
        int pick = best_size(t2, base).n_best;

        double c = 1 + trial % 7;
        OpLatencyTable scaled = t2;
        for (auto& [op, cells] : scaled.rows)
            for (auto& cell : cells)
                cell.latency_us = static_cast<std::int64_t>(cell.latency_us * c);
        WorkloadModel sw = base;
        sw.l_r1_us *= c;
        CHECK(best_size(scaled, sw).n_best == pick);
    }
}

TEST_CASE("profiling maps circuits over sizes and flags infeasible cells") {
    std::map<std::string, Program> circuits;
    circuits["h"] = parse_qasm("QUBIT a, 0\nH a\n");
    // six ancillas: more than the four creation wells of a single template
    std::string heavy;
    for (int q = 0; q < 6; ++q) heavy += "QUBIT q" + std::to_string(q) + ", 0\n";
    heavy += "CNOT q0, q1\nCNOT q2, q3\nCNOT q4, q5\n";
    circuits["t_like"] = parse_qasm(heavy);

    FlowConfig flow_cfg;
    flow_cfg.fast = true;
    OpLatencyTable table = profile_sizes(circuits, {1, 2}, TemplateLayout::builtin(),
                                         FabricConfig{}, flow_cfg, 2);
    CHECK(table.rows["h"][0].feasible);
    CHECK(table.rows["h"][1].feasible);
    CHECK(!table.rows["t_like"][0].feasible); // 6 ancillas vs 4 creation wells
    CHECK(table.rows["t_like"][1].feasible);
    CHECK(table.rows["h"][0].latency_us > 0);

    WorkloadModel w = toffoli_workload(default_l_r1_us(TemplateLayout::builtin(),
                                                       FabricConfig{}));
    CHECK(w.weights.at("CNOT") == 6.0);
    CHECK(w.d_r_avg == 13.0);
    CHECK(w.l_r1_us == 110.0);
}
