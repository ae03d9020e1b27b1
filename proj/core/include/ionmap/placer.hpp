#ifndef IONMAP_PLACER_HPP
#define IONMAP_PLACER_HPP

#include <cstdint>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "ionmap/fabric.hpp"
#include "ionmap/qidg.hpp"
#include "ionmap/scheduler.hpp"

namespace ionmap {

struct PlacerConfig {
    double m_max = 100.0;            // saturation for timing net weights
    double pseudo_weight_base = 0.1; // first legalization anchor, x growth each pass
    double pseudo_weight_growth = 1.5;
    double cg_tolerance = 1e-6;
    int max_global_iters = 50;       // quadratic solves per level pass
    int defer_batch_count = 1;       // reschedule once this many deferrals accrue
    double defer_batch_slack_us = std::numeric_limits<double>::infinity();
    bool defer_enabled = true;
    int horizon_factor = 4;          // deferral floors capped at factor x levels
};

/// Timing net weight: min(m_max, 1 / (child_slack + level_gap - 1)),
/// saturating at m_max when the denominator is <= 0.
double net_weight(int child_slack, int level_gap, double m_max);

/// One-axis quadratic placement problem over free coordinates: two-pin nets
/// between free nodes plus fixed-point anchors. Solved with conjugate
/// gradients to a relative residual.
struct QuadraticSystem {
    int free_count = 0;
    std::vector<std::tuple<int, int, double>> nets;      // (i, j, weight)
    std::vector<std::tuple<int, double, double>> anchors; // (i, position, weight)

    std::vector<double> solve(double tolerance,
                              const std::vector<double>& warm_start = {}) const;
    double objective(const std::vector<double>& x) const;
};

/// Template-tile bins for per-level spreading. `sites` holds the interaction
/// well coordinates of each bin (may be empty for synthetic grids, in which
/// case spread targets are spaced evenly inside the bin box).
struct BinGrid {
    int rows = 0;
    int cols = 0;
    double bin_w = 1.0;
    double bin_h = 1.0;
    std::vector<int> capacity;                                   // rows*cols
    std::vector<std::vector<std::pair<double, double>>> sites;   // rows*cols

    static BinGrid from_fabric(const Fabric& fabric);
    int cap(int bi, int bj) const { return capacity[bi * cols + bj]; }
};

/// Capacity-respecting spread of same-level items: recursive region
/// bisection with occupancy-proportional splitting, order-preserving along
/// the split axis. Returns one target per item (identical to the input when
/// no bin is over capacity). Throws Overcapacity when the items cannot fit.
std::vector<std::pair<double, double>> spread_level(
    const BinGrid& bins, const std::vector<std::pair<double, double>>& coords);

/// Greedy nearest-well finalization for one level: globally closest
/// (Manhattan) pairs first, one instruction per well.
std::vector<WellId> assign_interaction_wells(
    const Fabric& fabric, const std::vector<std::pair<double, double>>& coords);

/// Earliest-arrival estimate from finished parents and first-use origins:
/// max over parents of finish + static latency, and over origins of static
/// latency from the origin well.
std::int64_t predicted_start_us(
    const Fabric& fabric, WellId well,
    const std::vector<std::pair<WellId, std::int64_t>>& parent_finishes,
    const std::vector<WellId>& first_use_origins);

struct Placement {
    Schedule schedule;                       // final levels after deferrals
    std::vector<WellId> instruction_well;
    std::vector<std::pair<double, double>> coords; // (x=col, y=row)
    std::vector<std::int64_t> predicted_start_us;
    std::vector<WellId> qubit_origin;        // creation well / entry port
    std::vector<WellId> io_exit_port;        // -1 for ancillas
    int defer_count = 0;
    int reschedule_count = 0;
};

/// Full variable-level placement: per level, quadratic global placement with
/// timing net weights, per-level rough legalization with pseudo-net anchors,
/// greedy well finalization, start-time prediction, and deferral of
/// instructions that miss their slot threshold (re-invoking the scheduler
/// with raised floors). Ancillas are finally pinned to the free creation
/// well closest to their first use. Throws NoCreationWell when more
/// ancillas are alive than creation wells exist.
Placement place_instructions(const Qidg& g, const Schedule& schedule,
                             const Fabric& fabric, const PlacerConfig& cfg,
                             std::uint64_t seed);

/// Per-qubit accessor order under a schedule (level, then instruction index).
std::vector<std::vector<int>> qubit_access_order(const Qidg& g,
                                                 const Schedule& schedule);

/// Per-instruction table (index, level, well, x, y, predicted start); with
/// `visual` set, appends one character grid per level for small fabrics.
void dump_placement(std::ostream& out, const Qidg& g, const Placement& placement,
                    const Fabric& fabric, bool visual = false);

} // namespace ionmap

#endif
