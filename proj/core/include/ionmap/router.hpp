#ifndef IONMAP_ROUTER_HPP
#define IONMAP_ROUTER_HPP

#include <cstdint>
#include <vector>

#include "ionmap/command.hpp"
#include "ionmap/fabric.hpp"
#include "ionmap/placer.hpp"
#include "ionmap/qidg.hpp"
#include "ionmap/scheduler.hpp"

namespace ionmap {

/// One planned qubit movement: after `after_instr` (or from the origin when
/// -1) toward `to_instr`'s well (or the exit port when -1).
struct QubitLeg {
    int qubit = -1;
    int after_instr = -1;
    int to_instr = -1;
    std::vector<WellId> path; // BFS shortest path, endpoints included
};

/// Shortest path per required movement: origin -> first use, between
/// consecutive uses, last use -> exit port for I/O qubits.
std::vector<QubitLeg> static_routes(const Qidg& g, const Placement& placement,
                                    const Fabric& fabric);

struct RouteResult {
    CommandStream stream;
    std::vector<std::int64_t> start_us;  // per instruction
    std::vector<std::int64_t> finish_us;
    std::int64_t total_latency_us = 0;
    std::int64_t stall_events = 0; // denied moves / blocked ready operations
};

/// Discrete-event simulation at move-delay ticks. Qubits follow their static
/// paths and stall on capacity, half-duplex or reservation conflicts (more
/// critical instructions first, then lower qubit id). An instruction fires
/// once its operands co-reside at its well, its parents have finished and
/// the well is free. Throws Deadlock if nothing can ever progress.
RouteResult dynamic_route(const Qidg& g, const Placement& placement,
                          const Fabric& fabric);

/// Congestion-free lower bound: longest dependency path of instruction
/// durations plus static hop latencies (including origin entry and I/O exit
/// legs). dynamic_route can never beat it and matches it when nothing stalls.
std::int64_t static_lower_bound_us(const Qidg& g, const Placement& placement,
                                   const Fabric& fabric);

} // namespace ionmap

#endif
