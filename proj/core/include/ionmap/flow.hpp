#ifndef IONMAP_FLOW_HPP
#define IONMAP_FLOW_HPP

#include <cstdint>
#include <vector>

#include "ionmap/emulator.hpp"
#include "ionmap/fabric.hpp"
#include "ionmap/placer.hpp"
#include "ionmap/qasm.hpp"
#include "ionmap/qidg.hpp"
#include "ionmap/router.hpp"
#include "ionmap/scheduler.hpp"

namespace ionmap {

struct FlowConfig {
    SchedulerConfig scheduler;   // n_max 0 = number of interaction wells
    PlacerConfig placer;
    std::uint64_t seed = 0;
    bool fast = false;           // run only the default cap candidate
    int jobs = 1;                // worker threads across cap candidates
};

struct CandidateOutcome {
    double alpha = 1.0;
    int n_m = 0;
    Schedule schedule;
    std::int64_t latency_us = 0;
    std::int64_t static_lower_bound_us = 0;
    bool ok = false;             // routed and emulator-validated
    std::string error;           // failure code when !ok
};

struct FlowResult {
    Qidg raw_graph;      // before preprocessing; sibling sets computed
    Qidg graph;          // preprocessed, levelized at the chosen horizon
    Placement placement;
    RouteResult route;
    ValidationReport report;
    std::vector<CandidateOutcome> candidates;
    int chosen = -1;
};

/// End-to-end mapping: dependency graph, preprocessing, the cap sweep
/// (each candidate carried through placement, routing and validation), and
/// selection of the best-latency validated candidate.
FlowResult map_circuit(const Program& program, const Fabric& fabric,
                       const FlowConfig& config);

} // namespace ionmap

#endif
