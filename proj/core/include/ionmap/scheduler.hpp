#ifndef IONMAP_SCHEDULER_HPP
#define IONMAP_SCHEDULER_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "ionmap/qidg.hpp"

namespace ionmap {

struct Schedule {
    std::vector<int> level;          // node -> scheduling level (0-based)
    int num_levels = 0;
    std::vector<int> per_level_count;
    int n_cap = 0;                   // the concurrency cap this was built with
    std::vector<int> deferral_floor; // node -> minimum admissible level
};

struct SchedulerConfig {
    int n_max = 0; // <= number of interaction wells; 0 = derive from fabric
    std::vector<double> alpha_set{1.0, 0.8, 0.6, 0.4, 0.2};
};

struct ScheduleCandidate {
    double alpha = 1.0;
    int n_m = 0;
    Schedule schedule;
};

/// Serializes every sibling set with AUX edges: repeatedly pick, among the
/// lowest-asap nodes still carrying siblings, the highest-priority one
/// (mobility, then lower index), make it a parent of its remaining siblings,
/// and re-levelize. Idempotent; the graph stays acyclic.
void preprocess(Qidg& g);

/// Latency-constrained force-directed scheduling under a per-level cap.
/// Levels at the cap stop accepting probability mass; when a node runs out
/// of feasible levels the horizon grows by one and ranges are recomputed.
/// `floors` (empty = all zero) gives per-node minimum levels; `pinned`
/// (empty = none; -1 = free) fixes already-finalized nodes to their levels.
Schedule fds_schedule(const Qidg& g, int n_m, const std::vector<int>& floors = {},
                      const std::vector<int>& pinned = {});

/// One fds_schedule run per cap ceil(alpha * N^ma); candidates keep their
/// alpha/cap tags because the final pick happens after routing.
std::vector<ScheduleCandidate> schedule_enumerated(const Qidg& g,
                                                   const SchedulerConfig& cfg,
                                                   const std::vector<int>& floors = {});

/// Index of the default candidate: fewest levels, then smallest maximum
/// per-level count, then first in alpha order.
int default_candidate(const std::vector<ScheduleCandidate>& candidates);

/// max-width bound used for the cap enumeration:
/// min(n_max, max_k |{i : asap_i = k}|).
int enumeration_base(const Qidg& g, int n_max);

/// Minimum level count satisfying precedence, pairwise sibling exclusion and
/// the concurrency cap, by exhaustive search. Call on the graph *before*
/// preprocessing (with sibling sets computed). Throws TooLarge above 16 nodes.
int exact_oracle(const Qidg& g, int n_max);

/// Independent checker of the scheduling constraints (single level per node,
/// precedence, sibling exclusion, cap, floors). Returns human-readable
/// violations; empty means the schedule is valid. Shares no logic with
/// fds_schedule.
std::vector<std::string> validate_schedule(const Qidg& g, const Schedule& s,
                                           int n_cap);

/// Text table dump: instruction, opcode, level, cap.
void dump_schedule(std::ostream& out, const Qidg& g, const Schedule& s);

} // namespace ionmap

#endif
