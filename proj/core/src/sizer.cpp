#include "ionmap/sizer.hpp"

#include <atomic>
#include <thread>

namespace ionmap {

WorkloadModel toffoli_workload(double l_r1_us) {
    WorkloadModel w;
    w.weights = {{"T", 2.0}, {"Tdag", 2.0}, {"CNOT", 6.0}, {"H", 1.0}};
    w.d_r_avg = 13.0;
    w.l_r1_us = l_r1_us;
    return w;
}

double default_l_r1_us(const TemplateLayout& layout, const FabricConfig& config) {
    return static_cast<double>(layout.rows) *
           static_cast<double>(config.move_delay_us);
}

OpLatencyTable profile_sizes(const std::map<std::string, Program>& circuits,
                             const std::vector<int>& sizes,
                             const TemplateLayout& layout,
                             const FabricConfig& base_config,
                             const FlowConfig& flow_config, int jobs) {
    OpLatencyTable table;
    table.sizes = sizes;
    for (const auto& [name, prog] : circuits)
        table.rows[name].resize(sizes.size());

    struct Task {
        const std::string* name;
        const Program* program;
        size_t size_index;
    };
    std::vector<Task> tasks;
    for (const auto& [name, prog] : circuits)
        for (size_t s = 0; s < sizes.size(); ++s)
            tasks.push_back({&name, &prog, s});

    auto run_task = [&](const Task& task) {
        FabricConfig cfg = base_config;
        cfg.ulb_n = sizes[task.size_index];
        Fabric fabric(layout, cfg);
        FlowConfig fc = flow_config;
        fc.jobs = 1; // the outer pool owns the parallelism
        OpLatencyEntry& cell = table.rows[*task.name][task.size_index];
        try {
            FlowResult result = map_circuit(*task.program, fabric, fc);
            cell.feasible = result.report.ok;
            cell.latency_us = result.report.total_latency_us;
        } catch (const Error& e) {
            if (e.code() == "NoCreationWell" || e.code() == "Deadlock" ||
                e.code() == "HorizonExceeded") {
                cell.feasible = false;
            } else {
                throw;
            }
        }
    };

    int workers = std::max(1, jobs);
    if (workers == 1 || tasks.size() <= 1) {
        for (const Task& task : tasks) run_task(task);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min<int>(workers, static_cast<int>(tasks.size())); ++w)
            pool.emplace_back([&] {
                for (size_t k = next.fetch_add(1); k < tasks.size();
                     k = next.fetch_add(1))
                    run_task(tasks[k]);
            });
        for (std::thread& th : pool) th.join();
    }
    return table;
}

SizeChoice best_size(const OpLatencyTable& table, const WorkloadModel& workload) {
    SizeChoice choice;
    for (size_t s = 0; s < table.sizes.size(); ++s) {
        SizeObjective obj;
        obj.n = table.sizes[s];
        obj.feasible = true;
        obj.objective = obj.n * workload.l_r1_us * workload.d_r_avg;
        for (const auto& [op, weight] : workload.weights) {
            if (weight == 0.0) continue;
            auto it = table.rows.find(op);
            if (it == table.rows.end() || !it->second[s].feasible) {
                obj.feasible = false;
                break;
            }
            obj.objective += weight * static_cast<double>(it->second[s].latency_us);
        }
        choice.objectives.push_back(obj);
    }
    double best_obj = 0.0;
    for (const SizeObjective& obj : choice.objectives) {
        if (!obj.feasible) continue;
        if (choice.n_best < 0 || obj.objective < best_obj) {
            choice.n_best = obj.n;
            best_obj = obj.objective;
        }
    }
    if (choice.n_best < 0)
        throw Error("NoFeasibleSize", "no candidate size maps every weighted operation");
    return choice;
}

double toffoli_cost(double l_t, double l_tdag, double l_cnot, double l_h, int n,
                    double l_r1) {
    return 2 * l_t + 2 * l_tdag + 6 * l_cnot + l_h + 13.0 * n * l_r1;
}

std::vector<ToffoliLedgerRow> toffoli_ledger(double l_t, double l_tdag,
                                             double l_cnot, double l_h, int n,
                                             double l_r1) {
    double nl = static_cast<double>(n) * l_r1;
    return {
        {"1", "H q2", 3, l_h, true},
        {"2", "CNOT q1,q2", 2, l_cnot + 2 * nl, true},
        {"3", "Tdag q2", 4, l_tdag + nl, true},
        {"4", "CNOT q0,q2", 1, l_cnot + 2 * nl, true},
        {"5", "T q2", 3, l_t + nl, true},
        {"6", "CNOT q1,q2", 2, l_cnot + 2 * nl, true},
        {"7.a", "Tdag q2", 4, l_tdag + nl, true},
        {"7.b", "T q1", 2, l_t, false},
        {"8", "CNOT q0,q2", 4, l_cnot + nl, true},
        {"9.a", "T q2", 3, l_t + nl, false},
        {"9.b", "CNOT q0,q1", 4, l_cnot + nl, true},
        {"10.a", "H q2", 3, l_h, false},
        {"10.b", "T q0", 1, l_t + nl, true},
        {"10.c", "Tdag q1", 2, l_tdag, false},
        {"11", "CNOT q0,q1", 1, l_cnot + nl, true},
    };
}

} // namespace ionmap
