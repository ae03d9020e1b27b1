#include "ionmap/router.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace ionmap {

std::vector<QubitLeg> static_routes(const Qidg& g, const Placement& placement,
                                    const Fabric& fabric) {
    std::vector<QubitLeg> legs;
    std::vector<std::vector<int>> order = qubit_access_order(g, placement.schedule);
    for (int q = 0; q < g.qubit_count(); ++q) {
        WellId at = placement.qubit_origin[q];
        int prev = -1;
        for (int node : order[q]) {
            WellId next = placement.instruction_well[node];
            QubitLeg leg{q, prev, node, {}};
            if (at != next) leg.path = fabric.shortest_path(at, next);
            legs.push_back(std::move(leg));
            at = next;
            prev = node;
        }
        if (placement.io_exit_port[q] >= 0) {
            QubitLeg leg{q, prev, -1, {}};
            if (at != placement.io_exit_port[q])
                leg.path = fabric.shortest_path(at, placement.io_exit_port[q]);
            legs.push_back(std::move(leg));
        }
    }
    return legs;
}

namespace {

struct QubitSim {
    WellId at = -1;
    size_t leg = 0;        // index into its leg list
    size_t hop = 0;        // position on current leg path
    std::vector<int> legs; // indices into the global leg vector
};

struct InstrSim {
    WellId well = -1;
    int pending_parents = 0;
    int waiting_operands = 0;
    bool started = false;
    bool done = false;
    std::int64_t finish = 0;
};

} // namespace

RouteResult dynamic_route(const Qidg& g, const Placement& placement,
                          const Fabric& fabric) {
    const std::int64_t tick = fabric.config().move_delay_us;
    const int cap = fabric.config().well_capacity;

    RouteResult out;
    out.start_us.assign(g.size(), 0);
    out.finish_us.assign(g.size(), 0);

    std::vector<QubitLeg> all_legs = static_routes(g, placement, fabric);
    std::vector<QubitSim> qubits(g.qubit_count());
    std::vector<InstrSim> instrs(g.size());
    for (size_t l = 0; l < all_legs.size(); ++l)
        qubits[all_legs[l].qubit].legs.push_back(static_cast<int>(l));

    std::vector<int> occupancy(fabric.well_count(), 0);
    std::vector<std::int64_t> reserved_until(fabric.well_count(), -1);
    std::vector<int> reserved_by(fabric.well_count(), -1);

    for (int i = 0; i < g.size(); ++i) {
        instrs[i].well = placement.instruction_well[i];
        instrs[i].pending_parents = static_cast<int>(g.node(i).parents.size());
        instrs[i].waiting_operands = static_cast<int>(g.node(i).operands.size());
    }

    // A consumed qubit leaves the fabric: ancillas are reclaimed when their
    // last instruction completes, I/O qubits exit through their port.
    std::vector<int> final_instr(g.qubit_count(), -1);
    std::vector<char> retired(g.qubit_count(), 0);
    {
        std::vector<std::vector<int>> order =
            qubit_access_order(g, placement.schedule);
        for (int q = 0; q < g.qubit_count(); ++q)
            if (!order[q].empty()) final_instr[q] = order[q].back();
    }
    auto retire_if_done = [&](int q) {
        if (retired[q] || qubits[q].at < 0) return;
        if (qubits[q].leg < qubits[q].legs.size()) return;
        if (placement.io_exit_port[q] < 0 && final_instr[q] >= 0 &&
            !instrs[final_instr[q]].done)
            return;
        retired[q] = 1;
        --occupancy[qubits[q].at];
    };

    // Everything enters at t=0: ancillas via CREATE at their creation wells,
    // I/O qubits silently at their ports. Qubits the circuit never touches
    // are not materialized.
    for (int q = 0; q < g.qubit_count(); ++q) {
        if (final_instr[q] < 0) {
            retired[q] = 1;
            continue;
        }
        qubits[q].at = placement.qubit_origin[q];
        if (qubits[q].at < 0) continue;
        ++occupancy[qubits[q].at];
        if (g.qubits()[q].kind == QubitKind::Ancilla)
            out.stream.commands.push_back(
                {CommandKind::Create, 0, q, -1, -1, qubits[q].at, "", {}});
    }

    // A qubit that is standing at its leg target counts as a delivered
    // operand for the target instruction.
    auto arrival_check = [&](int q) {
        QubitSim& qs = qubits[q];
        while (qs.leg < qs.legs.size()) {
            const QubitLeg& leg = all_legs[qs.legs[qs.leg]];
            WellId target = leg.to_instr >= 0 ? instrs[leg.to_instr].well
                                              : placement.io_exit_port[q];
            bool parent_done = leg.after_instr < 0 || instrs[leg.after_instr].done;
            if (!parent_done || qs.at != target) break;
            if (leg.to_instr >= 0) --instrs[leg.to_instr].waiting_operands;
            ++qs.leg;
            qs.hop = 0;
        }
    };
    for (int q = 0; q < g.qubit_count(); ++q)
        if (qubits[q].at >= 0) arrival_check(q);

    // Criticality: less slack first, then lower instruction index.
    auto instr_priority = [&](int i) {
        return std::tuple(g.node(i).alap - g.node(i).asap, i);
    };

    // Instructions sharing a well admit their operands oldest-first;
    // otherwise early arrivals for late instructions camp inside and can
    // wedge the well at capacity.
    std::vector<std::vector<int>> well_queue(fabric.well_count());
    for (int i = 0; i < g.size(); ++i) well_queue[instrs[i].well].push_back(i);
    for (auto& queue : well_queue)
        std::sort(queue.begin(), queue.end(), [&](int a, int b) {
            return std::tuple(placement.schedule.level[a], a) <
                   std::tuple(placement.schedule.level[b], b);
        });
    auto admission_head = [&](WellId w) {
        for (int i : well_queue[w])
            if (!instrs[i].done) return i;
        return -1;
    };

    int remaining_ops = g.size();
    auto qubit_busy = [&](int q) {
        return qubits[q].leg < qubits[q].legs.size();
    };

    std::int64_t t = 0;
    std::int64_t last_event = 0;
    const std::int64_t safety_horizon =
        tick * 1000 * (static_cast<std::int64_t>(g.size()) + g.qubit_count() + 4) *
        (fabric.grid_rows() + fabric.grid_cols());

    while (true) {
        bool work_left = remaining_ops > 0;
        if (!work_left)
            for (int q = 0; q < g.qubit_count() && !work_left; ++q)
                if (qubit_busy(q)) work_left = true;
        if (!work_left) break;

        bool progressed = false;
        bool ops_running = false;

        // 1. Finish operations due now; their operands become movable (or
        //    leave the fabric when fully consumed).
        for (int i = 0; i < g.size(); ++i) {
            InstrSim& is = instrs[i];
            if (is.started && !is.done && is.finish <= t) {
                is.done = true;
                reserved_until[is.well] = -1;
                reserved_by[is.well] = -1;
                for (int c : g.node(i).children) --instrs[c].pending_parents;
                for (int q : g.node(i).operands) {
                    arrival_check(q);
                    retire_if_done(q);
                }
                --remaining_ops;
                progressed = true;
            }
        }

        // 2. Start ready operations, most critical first.
        {
            std::vector<int> ready;
            for (int i = 0; i < g.size(); ++i) {
                const InstrSim& is = instrs[i];
                if (!is.started && is.pending_parents == 0 && is.waiting_operands == 0)
                    ready.push_back(i);
            }
            std::sort(ready.begin(), ready.end(), [&](int a, int b) {
                return instr_priority(a) < instr_priority(b);
            });
            for (int i : ready) {
                InstrSim& is = instrs[i];
                if (reserved_by[is.well] >= 0) {
                    ++out.stall_events;
                    continue;
                }
                is.started = true;
                is.finish = t + g.node(i).duration_us;
                reserved_until[is.well] = is.finish;
                reserved_by[is.well] = i;
                out.start_us[i] = t;
                out.finish_us[i] = is.finish;
                out.stream.commands.push_back({CommandKind::Operate, t, -1, i + 1, -1,
                                               is.well, g.node(i).opcode,
                                               g.node(i).operands});
                progressed = true;
            }
        }

        // 3. Grant moves for this tick: one hop per qubit, half-duplex
        //    channels, end-of-tick capacity, no crossing reserved wells.
        {
            std::vector<int> movers;
            for (int q = 0; q < g.qubit_count(); ++q) {
                QubitSim& qs = qubits[q];
                if (qs.leg >= qs.legs.size()) continue;
                const QubitLeg& leg = all_legs[qs.legs[qs.leg]];
                if (leg.after_instr >= 0 && !instrs[leg.after_instr].done) continue;
                if (leg.path.empty()) continue; // waiting in place
                movers.push_back(q);
            }
            std::sort(movers.begin(), movers.end(), [&](int a, int b) {
                const QubitLeg& la = all_legs[qubits[a].legs[qubits[a].leg]];
                const QubitLeg& lb = all_legs[qubits[b].legs[qubits[b].leg]];
                auto pa = la.to_instr >= 0 ? instr_priority(la.to_instr)
                                           : std::tuple(1 << 30, a);
                auto pb = lb.to_instr >= 0 ? instr_priority(lb.to_instr)
                                           : std::tuple(1 << 30, b);
                return std::tuple(pa, a) < std::tuple(pb, b);
            });

            std::map<std::pair<WellId, WellId>, int> channel_dir; // canon -> sign
            std::vector<std::pair<int, WellId>> arrivals;         // qubit, well
            for (int q : movers) {
                QubitSim& qs = qubits[q];
                const QubitLeg& leg = all_legs[qs.legs[qs.leg]];
                WellId here = leg.path[qs.hop];
                WellId next = leg.path[qs.hop + 1];
                // reservation forbids leaving or entering a busy well
                if (reserved_by[here] >= 0 || reserved_by[next] >= 0) {
                    ++out.stall_events;
                    continue;
                }
                // final hop: wait at the doorstep until our instruction is
                // the oldest pending one at the destination
                if (qs.hop + 2 == leg.path.size() && leg.to_instr >= 0 &&
                    admission_head(next) != leg.to_instr) {
                    ++out.stall_events;
                    continue;
                }
                auto canon = here < next ? std::pair{here, next} : std::pair{next, here};
                int dir = here < next ? 1 : -1;
                auto it = channel_dir.find(canon);
                if (it != channel_dir.end() && it->second != dir) {
                    ++out.stall_events;
                    continue;
                }
                if (occupancy[next] + 1 > cap) {
                    ++out.stall_events;
                    continue;
                }
                channel_dir[canon] = dir;
                --occupancy[here];
                ++occupancy[next];
                out.stream.commands.push_back(
                    {CommandKind::Move, t, q, -1, here, next, "", {}});
                arrivals.emplace_back(q, next);
                progressed = true;
            }
            for (auto [q, next] : arrivals) {
                QubitSim& qs = qubits[q];
                ++qs.hop;
                qs.at = next;
                const QubitLeg& leg = all_legs[qs.legs[qs.leg]];
                if (qs.hop + 1 >= leg.path.size()) {
                    arrival_check(q);
                    retire_if_done(q); // exit port reached
                }
            }
        }

        for (const InstrSim& is : instrs)
            if (is.started && !is.done) ops_running = true;

        if (progressed) last_event = t;
        // With no command issued and no operation pending completion the
        // state is tick-invariant: nothing will ever progress again.
        if ((!progressed && !ops_running) || t - last_event > safety_horizon) {
            std::string diag = "no progress at t=" + std::to_string(t) + "us;";
            for (int q = 0; q < g.qubit_count(); ++q) {
                const QubitSim& qs = qubits[q];
                if (qs.leg >= qs.legs.size()) continue;
                const QubitLeg& leg = all_legs[qs.legs[qs.leg]];
                diag += " q" + std::to_string(q) + "@(" +
                        std::to_string(fabric.well(qs.at).row) + "," +
                        std::to_string(fabric.well(qs.at).col) + ")";
                if (leg.after_instr >= 0 && !instrs[leg.after_instr].done)
                    diag += " awaits I" + std::to_string(leg.after_instr + 1);
                else if (!leg.path.empty())
                    diag += " blocked toward (" +
                            std::to_string(fabric.well(leg.path[qs.hop + 1]).row) +
                            "," +
                            std::to_string(fabric.well(leg.path[qs.hop + 1]).col) +
                            ") occ=" + std::to_string(occupancy[leg.path[qs.hop + 1]]);
            }
            for (int i = 0; i < g.size(); ++i)
                if (!instrs[i].done && !instrs[i].started)
                    diag += " I" + std::to_string(i + 1) + " waits " +
                            std::to_string(instrs[i].waiting_operands) + " operands/" +
                            std::to_string(instrs[i].pending_parents) + " parents";
            throw Error("Deadlock", diag);
        }

        t += tick;
    }

    // Arrived qubits but qubits with pending waits (arrival_check consumed
    // them) -- total latency is the completion time of the last command.
    std::int64_t total = 0;
    for (const Command& cmd : out.stream.commands) {
        std::int64_t end = cmd.time_us;
        if (cmd.kind == CommandKind::Move) end += tick;
        if (cmd.kind == CommandKind::Operate) {
            const QidgNode& n = g.node(cmd.instr - 1);
            end += n.duration_us;
        }
        total = std::max(total, end);
    }
    out.total_latency_us = total;
    out.stream.total_latency_us = total;
    out.stream.sort();
    return out;
}

std::int64_t static_lower_bound_us(const Qidg& g, const Placement& placement,
                                   const Fabric& fabric) {
    std::vector<std::int64_t> start(g.size(), 0);
    std::vector<std::vector<int>> order = qubit_access_order(g, placement.schedule);

    for (int q = 0; q < g.qubit_count(); ++q) {
        if (order[q].empty() || placement.qubit_origin[q] < 0) continue;
        int first = order[q].front();
        start[first] = std::max(
            start[first], fabric.static_latency_us(placement.qubit_origin[q],
                                                   placement.instruction_well[first]));
    }
    std::int64_t best = 0;
    for (int n : g.topological_order()) {
        for (int c : g.node(n).children) {
            std::int64_t arrive =
                start[n] + g.node(n).duration_us +
                fabric.static_latency_us(placement.instruction_well[n],
                                         placement.instruction_well[c]);
            start[c] = std::max(start[c], arrive);
        }
        best = std::max(best, start[n] + g.node(n).duration_us);
    }
    for (int q = 0; q < g.qubit_count(); ++q) {
        if (placement.io_exit_port[q] < 0 || order[q].empty()) continue;
        int last = order[q].back();
        best = std::max(best, start[last] + g.node(last).duration_us +
                                  fabric.static_latency_us(
                                      placement.instruction_well[last],
                                      placement.io_exit_port[q]));
    }
    return best;
}

} // namespace ionmap
