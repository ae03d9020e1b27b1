#ifndef IONMAP_SIZER_HPP
#define IONMAP_SIZER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ionmap/flow.hpp"

namespace ionmap {

struct OpLatencyEntry {
    bool feasible = false;
    std::int64_t latency_us = 0;
};

/// Per-operation latency as a function of the ULB size.
struct OpLatencyTable {
    std::vector<int> sizes;
    std::map<std::string, std::vector<OpLatencyEntry>> rows; // op -> per size
};

/// Occurrence weights on the critical path plus the inter-block routing
/// model: objective(n) = n * l_r1 * d_r_avg + sum_o w_o * L_o(n).
struct WorkloadModel {
    std::map<std::string, double> weights;
    double d_r_avg = 0.0;
    double l_r1_us = 0.0;
};

/// The 15-operation Toffoli preset: {T:2, Tdag:2, CNOT:6, H:1}, average
/// inter-block distance 13.
WorkloadModel toffoli_workload(double l_r1_us);

/// Routing latency between adjacent unit blocks: one template edge of hops.
double default_l_r1_us(const TemplateLayout& layout, const FabricConfig& config);

/// Maps every operation circuit onto every candidate size; each cell is the
/// best emulator-validated latency of the full flow, or infeasible when the
/// circuit cannot be mapped at that size (e.g. more ancillas than creation
/// wells).
OpLatencyTable profile_sizes(const std::map<std::string, Program>& circuits,
                             const std::vector<int>& sizes,
                             const TemplateLayout& layout,
                             const FabricConfig& base_config,
                             const FlowConfig& flow_config, int jobs = 1);

struct SizeObjective {
    int n = 0;
    bool feasible = false;
    double objective = 0.0;
};

struct SizeChoice {
    int n_best = -1;
    std::vector<SizeObjective> objectives;
};

/// argmin over feasible sizes of the workload objective; ties break to the
/// smaller size. Throws NoFeasibleSize when every size is infeasible.
SizeChoice best_size(const OpLatencyTable& table, const WorkloadModel& workload);

/// Closed-form critical-path cost of the 15-operation Toffoli realization on
/// a 2x2 block mesh: 2 L_T + 2 L_Tdag + 6 L_CNOT + L_H + 13 n L_r1.
double toffoli_cost(double l_t, double l_tdag, double l_cnot, double l_h, int n,
                    double l_r1);

struct ToffoliLedgerRow {
    std::string slot;        // "1", "7.a", ...
    std::string instruction;
    int block = 0;           // hosting block in the 2x2 mesh
    double cost = 0.0;
    bool critical = false;
};

/// Per-operation ledger of the same realization; the critical rows sum to
/// toffoli_cost exactly.
std::vector<ToffoliLedgerRow> toffoli_ledger(double l_t, double l_tdag,
                                             double l_cnot, double l_h, int n,
                                             double l_r1);

} // namespace ionmap

#endif
