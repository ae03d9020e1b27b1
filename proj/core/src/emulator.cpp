#include "ionmap/emulator.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

namespace ionmap {

namespace {

struct OpInterval {
    std::int64_t start;
    std::int64_t end;
    std::int64_t cmd_index;
};

} // namespace

ValidationReport validate_stream(const CommandStream& stream, const Fabric& fabric,
                                 const Qidg& g) {
    ValidationReport report;
    const std::int64_t move_us = fabric.config().move_delay_us;
    auto flag = [&](std::int64_t t, const char* rule, const std::string& detail,
                    std::int64_t idx) {
        if (report.violations.size() < 200)
            report.violations.push_back({t, rule, detail, idx});
    };
    auto pos_str = [&](WellId w) {
        return "(" + std::to_string(fabric.well(w).row) + "," +
               std::to_string(fabric.well(w).col) + ")";
    };

    std::vector<Command> cmds = stream.commands;
    std::stable_sort(cmds.begin(), cmds.end(), [](const Command& a, const Command& b) {
        return std::tuple(a.time_us, static_cast<int>(a.kind)) <
               std::tuple(b.time_us, static_cast<int>(b.kind));
    });

    // ---- command-shape checks and qubit position replay -------------------
    std::vector<WellId> position(g.qubit_count(), -1);
    std::vector<std::int64_t> settled_at(g.qubit_count(), 0); // arrival times
    std::vector<char> created(g.qubit_count(), 0);
    std::vector<std::int64_t> op_start(g.size(), -1);
    std::vector<WellId> initial_position(g.qubit_count(), -1);

    auto valid_qubit = [&](int q) { return q >= 0 && q < g.qubit_count(); };

    // First pass only pins down where each qubit materializes.
    for (const Command& cmd : cmds) {
        if (cmd.kind == CommandKind::Create && valid_qubit(cmd.qubit)) {
            if (initial_position[cmd.qubit] < 0) initial_position[cmd.qubit] = cmd.to;
        } else if (cmd.kind == CommandKind::Move && valid_qubit(cmd.qubit)) {
            if (initial_position[cmd.qubit] < 0) initial_position[cmd.qubit] = cmd.from;
        } else if (cmd.kind == CommandKind::Operate) {
            for (int q : cmd.operands)
                if (valid_qubit(q) && initial_position[q] < 0)
                    initial_position[q] = cmd.to;
        }
    }
    position = initial_position;

    std::int64_t total = 0;
    for (size_t idx = 0; idx < cmds.size(); ++idx) {
        const Command& cmd = cmds[idx];
        std::int64_t t = cmd.time_us;
        std::int64_t i = static_cast<std::int64_t>(idx);
        switch (cmd.kind) {
            case CommandKind::Create: {
                if (!valid_qubit(cmd.qubit)) {
                    flag(t, "UnknownQubit", "q" + std::to_string(cmd.qubit), i);
                    break;
                }
                if (fabric.well(cmd.to).kind != WellKind::Creation)
                    flag(t, "CreateOutsideCreationWell", pos_str(cmd.to), i);
                if (created[cmd.qubit])
                    flag(t, "DuplicateCreate", "q" + std::to_string(cmd.qubit), i);
                created[cmd.qubit] = 1;
                position[cmd.qubit] = cmd.to;
                settled_at[cmd.qubit] = t;
                total = std::max(total, t);
                break;
            }
            case CommandKind::Move: {
                if (!valid_qubit(cmd.qubit)) {
                    flag(t, "UnknownQubit", "q" + std::to_string(cmd.qubit), i);
                    break;
                }
                bool adjacent = false;
                for (WellId n : fabric.neighbors(cmd.from))
                    if (n == cmd.to) adjacent = true;
                if (!adjacent)
                    flag(t, "NonAdjacentMove",
                         pos_str(cmd.from) + "->" + pos_str(cmd.to), i);
                if (position[cmd.qubit] != cmd.from)
                    flag(t, "TeleportedQubit",
                         "q" + std::to_string(cmd.qubit) + " is at " +
                             (position[cmd.qubit] >= 0 ? pos_str(position[cmd.qubit])
                                                       : std::string("nowhere")) +
                             ", not " + pos_str(cmd.from),
                         i);
                else if (settled_at[cmd.qubit] > t)
                    flag(t, "MoveWhileInFlight",
                         "q" + std::to_string(cmd.qubit) + " arrives at " +
                             std::to_string(settled_at[cmd.qubit]),
                         i);
                position[cmd.qubit] = cmd.to;
                settled_at[cmd.qubit] = t + move_us;
                total = std::max(total, t + move_us);
                break;
            }
            case CommandKind::Operate: {
                int node = cmd.instr - 1;
                if (node < 0 || node >= g.size()) {
                    flag(t, "UnknownInstruction", "I" + std::to_string(cmd.instr), i);
                    break;
                }
                if (fabric.well(cmd.to).kind != WellKind::Interaction)
                    flag(t, "OperateOutsideInteractionWell", pos_str(cmd.to), i);
                if (op_start[node] >= 0)
                    flag(t, "DuplicateOperate", "I" + std::to_string(cmd.instr), i);
                op_start[node] = t;
                if (cmd.operands != g.node(node).operands)
                    flag(t, "OperandMismatch", "I" + std::to_string(cmd.instr), i);
                for (int q : cmd.operands) {
                    if (!valid_qubit(q)) {
                        flag(t, "UnknownQubit", "q" + std::to_string(q), i);
                        continue;
                    }
                    if (position[q] != cmd.to || settled_at[q] > t)
                        flag(t, "OperandNotCoResident",
                             "q" + std::to_string(q) + " absent from " +
                                 pos_str(cmd.to) + " for I" + std::to_string(cmd.instr),
                             i);
                }
                total = std::max(total, t + g.node(node).duration_us);
                break;
            }
        }
    }

    // ---- reservation intervals --------------------------------------------
    std::map<WellId, std::vector<OpInterval>> reservations;
    for (size_t idx = 0; idx < cmds.size(); ++idx) {
        const Command& cmd = cmds[idx];
        if (cmd.kind != CommandKind::Operate) continue;
        int node = cmd.instr - 1;
        if (node < 0 || node >= g.size()) continue;
        reservations[cmd.to].push_back({cmd.time_us,
                                        cmd.time_us + g.node(node).duration_us,
                                        static_cast<std::int64_t>(idx)});
    }
    for (auto& [well, ivals] : reservations) {
        std::sort(ivals.begin(), ivals.end(),
                  [](const OpInterval& a, const OpInterval& b) {
                      return a.start < b.start;
                  });
        for (size_t k = 1; k < ivals.size(); ++k)
            if (ivals[k].start < ivals[k - 1].end)
                flag(ivals[k].start, "OverlappingOperations", pos_str(well),
                     ivals[k].cmd_index);
    }
    auto reserved_overlap = [&](WellId w, std::int64_t lo, std::int64_t hi) {
        // open interval (lo, hi) against open op interval (start, end)
        auto it = reservations.find(w);
        if (it == reservations.end()) return false;
        for (const OpInterval& iv : it->second)
            if (std::max(lo, iv.start) < std::min(hi, iv.end)) return true;
        return false;
    };
    auto reserved_at = [&](WellId w, std::int64_t t) {
        auto it = reservations.find(w);
        if (it == reservations.end()) return false;
        for (const OpInterval& iv : it->second)
            if (iv.start <= t && t < iv.end) return true;
        return false;
    };

    // ---- moves vs reservations and half-duplex channels --------------------
    std::map<std::pair<WellId, WellId>, std::vector<std::tuple<std::int64_t, int, std::int64_t>>>
        channel_use; // canon edge -> (issue time, direction, cmd index)
    for (size_t idx = 0; idx < cmds.size(); ++idx) {
        const Command& cmd = cmds[idx];
        if (cmd.kind != CommandKind::Move) continue;
        std::int64_t t = cmd.time_us;
        std::int64_t i = static_cast<std::int64_t>(idx);
        if (reserved_at(cmd.from, t))
            flag(t, "MoveFromReservedWell", pos_str(cmd.from), i);
        if (reserved_overlap(cmd.to, t, t + move_us))
            flag(t, "MoveIntoReservedWell", pos_str(cmd.to), i);
        auto canon = cmd.from < cmd.to ? std::pair{cmd.from, cmd.to}
                                       : std::pair{cmd.to, cmd.from};
        channel_use[canon].emplace_back(t, cmd.from < cmd.to ? 1 : -1, i);
    }
    for (auto& [edge, uses] : channel_use) {
        std::sort(uses.begin(), uses.end());
        for (size_t k = 1; k < uses.size(); ++k) {
            auto [t0, d0, i0] = uses[k - 1];
            auto [t1, d1, i1] = uses[k];
            if (d1 != d0 && t1 < t0 + move_us)
                flag(t1, "HalfDuplexViolation",
                     pos_str(edge.first) + "<->" + pos_str(edge.second), i1);
        }
    }

    // ---- occupancy timeline -------------------------------------------------
    {
        // A qubit occupies wells from its first materialization until it is
        // consumed: the completion of its last instruction (ancilla
        // purification) or its last move (port exit). Events are (time,
        // phase, well, delta, cmd); consumption and departures free slots
        // before arrivals land at the same instant, matching the
        // one-hop-per-tick semantics.
        std::vector<std::int64_t> enters(g.qubit_count(), 0);
        std::vector<std::int64_t> leaves(g.qubit_count(), -1);
        std::vector<WellId> last_pos = initial_position;
        for (size_t idx = 0; idx < cmds.size(); ++idx) {
            const Command& cmd = cmds[idx];
            switch (cmd.kind) {
                case CommandKind::Create:
                    if (valid_qubit(cmd.qubit)) {
                        enters[cmd.qubit] = cmd.time_us;
                        leaves[cmd.qubit] = cmd.time_us;
                        last_pos[cmd.qubit] = cmd.to;
                    }
                    break;
                case CommandKind::Move:
                    if (valid_qubit(cmd.qubit)) {
                        leaves[cmd.qubit] = cmd.time_us + move_us;
                        last_pos[cmd.qubit] = cmd.to;
                    }
                    break;
                case CommandKind::Operate: {
                    int node = cmd.instr - 1;
                    if (node < 0 || node >= g.size()) break;
                    for (int q : cmd.operands)
                        if (valid_qubit(q)) {
                            leaves[q] = std::max(
                                leaves[q], cmd.time_us + g.node(node).duration_us);
                            last_pos[q] = cmd.to;
                        }
                    break;
                }
            }
        }

        std::vector<std::tuple<std::int64_t, int, WellId, int, std::int64_t>> events;
        for (int q = 0; q < g.qubit_count(); ++q) {
            if (initial_position[q] < 0) continue;
            events.emplace_back(enters[q], -1, initial_position[q], 1, -1);
            if (leaves[q] >= 0) events.emplace_back(leaves[q], 0, last_pos[q], -1, -1);
        }
        for (size_t idx = 0; idx < cmds.size(); ++idx) {
            const Command& cmd = cmds[idx];
            if (cmd.kind != CommandKind::Move) continue;
            events.emplace_back(cmd.time_us, 0, cmd.from, -1,
                                static_cast<std::int64_t>(idx));
            events.emplace_back(cmd.time_us + move_us, 1, cmd.to, 1,
                                static_cast<std::int64_t>(idx));
        }
        std::sort(events.begin(), events.end());
        std::vector<int> occupancy(fabric.well_count(), 0);
        for (auto [t, phase, w, delta, i] : events) {
            occupancy[w] += delta;
            if (occupancy[w] > fabric.config().well_capacity)
                flag(t, "CapacityExceeded",
                     pos_str(w) + " holds " + std::to_string(occupancy[w]) +
                         " > " + std::to_string(fabric.config().well_capacity),
                     i);
        }
    }

    // ---- dependency order ----------------------------------------------------
    for (int i = 0; i < g.size(); ++i)
        if (op_start[i] < 0)
            flag(0, "MissingOperate", "I" + std::to_string(i + 1), -1);
    for (const QidgEdge& e : g.edges()) {
        if (op_start[e.from] < 0 || op_start[e.to] < 0) continue;
        if (op_start[e.to] < op_start[e.from] + g.node(e.from).duration_us)
            flag(op_start[e.to], "DependencyViolated",
                 "I" + std::to_string(e.from + 1) + " -> I" + std::to_string(e.to + 1),
                 -1);
    }

    report.total_latency_us = total;
    report.ok = report.violations.empty();
    return report;
}

void write_report(std::ostream& out, const ValidationReport& report) {
    out << (report.ok ? "OK" : "INVALID") << " total_latency_us="
        << report.total_latency_us << " violations=" << report.violations.size()
        << '\n';
    for (const Violation& v : report.violations)
        out << "  t=" << v.time_us << " " << v.rule << " " << v.detail
            << (v.command_index >= 0
                    ? " [command " + std::to_string(v.command_index) + "]"
                    : "")
            << '\n';
}

} // namespace ionmap
