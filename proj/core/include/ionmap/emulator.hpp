#ifndef IONMAP_EMULATOR_HPP
#define IONMAP_EMULATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ionmap/command.hpp"
#include "ionmap/fabric.hpp"
#include "ionmap/qidg.hpp"

namespace ionmap {

struct Violation {
    std::int64_t time_us = 0;
    std::string rule;   // NonAdjacentMove, CapacityExceeded, ...
    std::string detail;
    std::int64_t command_index = -1;
};

struct ValidationReport {
    bool ok = false;
    std::int64_t total_latency_us = 0;
    std::vector<Violation> violations;
};

/// Replays a command stream against the fabric rules and the dependency
/// graph: move adjacency, well capacity at every instant, half-duplex
/// channels, reservation exclusivity, operand co-residency, command/well
/// kind restrictions and full dependency order. Interval/event based, shares
/// no logic with the router so it can catch its bugs.
ValidationReport validate_stream(const CommandStream& stream, const Fabric& fabric,
                                 const Qidg& g);

void write_report(std::ostream& out, const ValidationReport& report);

} // namespace ionmap

#endif
