#include "ionmap/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <ostream>

namespace ionmap {

void preprocess(Qidg& g) {
    g.levelize();
    g.compute_sibling_sets();

    // Active sibling sets, maintained as in the list-scheduling pass: the
    // chosen node empties its own set and leaves everybody else's.
    std::vector<std::vector<int>> active(g.size());
    for (int i = 0; i < g.size(); ++i) active[i] = g.node(i).siblings;

    for (;;) {
        int target = std::numeric_limits<int>::max();
        for (int i = 0; i < g.size(); ++i)
            if (!active[i].empty()) target = std::min(target, g.node(i).asap);
        if (target == std::numeric_limits<int>::max()) break;

        int chosen = -1;
        for (int i = 0; i < g.size(); ++i) {
            if (active[i].empty() || g.node(i).asap != target) continue;
            if (chosen < 0 || g.node(i).mobility > g.node(chosen).mobility)
                chosen = i;
        }

        for (int j : active[chosen]) {
            g.add_aux_edge(chosen, j);
            auto& set = active[j];
            set.erase(std::remove(set.begin(), set.end(), chosen), set.end());
        }
        active[chosen].clear();
        g.levelize();
    }
    g.compute_sibling_sets(); // all ordered now; sets end up empty
}

namespace {

// Range/probability state for one force-directed run.
struct FdsState {
    const Qidg& g;
    int cap;
    int horizon;
    std::vector<int> floor;
    std::vector<int> level;  // -1 while unassigned
    std::vector<int> count;  // per level
    std::vector<char> closed;
    std::vector<int> es, ls;

    explicit FdsState(const Qidg& graph, int n_m, std::vector<int> floors,
                      std::vector<int> pinned)
        : g(graph), cap(n_m), floor(std::move(floors)),
          level(std::move(pinned)) {
        if (floor.empty()) floor.assign(g.size(), 0);
        if (level.empty()) level.assign(g.size(), -1);
        horizon = 1;
        recompute_ranges();
        horizon = 0;
        for (int i = 0; i < g.size(); ++i)
            horizon = std::max({horizon, es[i] + 1, level[i] + 1});
        count.assign(horizon, 0);
        closed.assign(horizon, 0);
        for (int l : level)
            if (l >= 0 && ++count[l] >= cap) closed[l] = 1;
        recompute_ranges();
    }

    void recompute_ranges() {
        es.assign(g.size(), 0);
        ls.assign(g.size(), horizon - 1);
        std::vector<int> order = g.topological_order();
        for (int n : order) {
            int lo = std::max(0, floor[n]);
            for (int p : g.node(n).parents)
                lo = std::max(lo, (level[p] >= 0 ? level[p] : es[p]) + 1);
            es[n] = lo;
            if (level[n] >= 0) es[n] = level[n];
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int n = *it;
            int hi = horizon - 1;
            for (int c : g.node(n).children)
                hi = std::min(hi, (level[c] >= 0 ? level[c] : ls[c]) - 1);
            ls[n] = hi;
            if (level[n] >= 0) ls[n] = level[n];
        }
    }

    std::vector<int> feasible_levels(int n) const {
        std::vector<int> out;
        for (int l = es[n]; l <= ls[n]; ++l)
            if (!closed[l]) out.push_back(l);
        return out;
    }

    void grow_horizon() {
        ++horizon;
        count.push_back(0);
        closed.push_back(0);
        recompute_ranges();
    }

    bool all_feasible() const {
        for (int i = 0; i < g.size(); ++i)
            if (level[i] < 0 && feasible_levels(i).empty()) return false;
        return true;
    }

    // Grow until every unassigned node has at least one open level. Returns
    // false when growth stops helping (a window capped by an assigned
    // neighbor cannot be widened).
    bool ensure_feasible() {
        for (;;) {
            if (all_feasible()) return true;
            if (horizon > 4 * (g.size() + 1)) return false;
            grow_horizon();
        }
    }
};

// Deterministic topological first-fit; always produces a valid schedule and
// backstops the force-directed pass when cap pressure corners it.
Schedule list_fallback(const Qidg& g, int cap, const std::vector<int>& floors,
                       const std::vector<int>& pinned) {
    Schedule out;
    out.n_cap = cap;
    out.deferral_floor = floors;
    std::vector<int> level = pinned.empty() ? std::vector<int>(g.size(), -1) : pinned;
    std::vector<int> count;
    auto count_at = [&](int l) -> int& {
        if (l >= static_cast<int>(count.size())) count.resize(l + 1, 0);
        return count[l];
    };
    for (int l : level)
        if (l >= 0) ++count_at(l);
    for (int n : g.topological_order()) {
        if (level[n] >= 0) continue;
        int l = floors[n];
        for (int p : g.node(n).parents) l = std::max(l, level[p] + 1);
        while (count_at(l) >= cap) ++l;
        level[n] = l;
        ++count_at(l);
    }
    out.level = level;
    for (int l : level) out.num_levels = std::max(out.num_levels, l + 1);
    out.per_level_count.assign(out.num_levels, 0);
    for (int l : level) ++out.per_level_count[l];
    return out;
}

} // namespace

Schedule fds_schedule(const Qidg& g, int n_m, const std::vector<int>& floors,
                      const std::vector<int>& pinned) {
    if (n_m < 1) throw Error("Infeasible", "concurrency cap must be >= 1");
    Schedule out;
    out.n_cap = n_m;
    out.deferral_floor = floors.empty() ? std::vector<int>(g.size(), 0) : floors;
    if (g.empty()) {
        out.per_level_count.clear();
        return out;
    }

    FdsState st(g, n_m, out.deferral_floor, pinned);
    if (!st.ensure_feasible())
        return list_fallback(g, n_m, out.deferral_floor,
                             pinned.empty() ? std::vector<int>(g.size(), -1) : pinned);

    int remaining = 0;
    for (int l : st.level)
        if (l < 0) ++remaining;
    std::set<std::pair<int, int>> forbidden; // assignments proven to strand a node
    int fruitless_growth = 0;
    while (remaining > 0) {
        // Distribution graph: certainty 1 for assigned nodes, uniform mass
        // over the open levels of each unassigned node.
        std::vector<double> dg(st.horizon, 0.0);
        std::vector<std::vector<int>> feas(g.size());
        for (int i = 0; i < g.size(); ++i) {
            if (st.level[i] >= 0) {
                dg[st.level[i]] += 1.0;
            } else {
                feas[i] = st.feasible_levels(i);
                for (int l : feas[i]) dg[l] += 1.0 / feas[i].size();
            }
        }
        auto avg_over = [&](const std::vector<int>& levels) {
            double s = 0.0;
            for (int l : levels) s += dg[l];
            return s / levels.size();
        };
        auto window = [&](int node, int lo, int hi) {
            std::vector<int> out_w;
            for (int l : feas[node])
                if (l >= lo && l <= hi) out_w.push_back(l);
            return out_w;
        };

        int best_node = -1, best_level = -1;
        double best_force = 0.0;
        for (int i = 0; i < g.size(); ++i) {
            if (st.level[i] >= 0) continue;
            double base = avg_over(feas[i]);
            for (int l : feas[i]) {
                if (forbidden.count({i, l})) continue;
                double force = dg[l] - base;
                bool legal = true;
                for (int p : g.node(i).parents) {
                    if (st.level[p] >= 0) continue;
                    auto w = window(p, st.es[p], std::min(st.ls[p], l - 1));
                    if (w.empty()) { legal = false; break; }
                    force += avg_over(w) - avg_over(feas[p]);
                }
                if (!legal) continue;
                for (int c : g.node(i).children) {
                    if (st.level[c] >= 0) continue;
                    auto w = window(c, std::max(st.es[c], l + 1), st.ls[c]);
                    if (w.empty()) { legal = false; break; }
                    force += avg_over(w) - avg_over(feas[c]);
                }
                if (!legal) continue;

                bool better = false;
                if (best_node < 0 || force < best_force - 1e-12) {
                    better = true;
                } else if (force < best_force + 1e-12) {
                    double mi = g.node(i).mobility, mb = g.node(best_node).mobility;
                    auto key_i = std::tuple(-mi, st.es[i], i, l);
                    auto key_b = std::tuple(-mb, st.es[best_node], best_node, best_level);
                    better = key_i < key_b;
                }
                if (better) {
                    best_node = i;
                    best_level = l;
                    best_force = force;
                }
            }
        }
        if (best_node < 0) {
            // Every candidate assignment strands a node; relax the horizon.
            if (++fruitless_growth > g.size() + 4)
                return list_fallback(g, n_m, out.deferral_floor,
                                     pinned.empty() ? std::vector<int>(g.size(), -1)
                                                    : pinned);
            st.grow_horizon();
            forbidden.clear();
            continue;
        }

        // Commit tentatively; an assignment may strand a node further up or
        // down the graph once the level fills, so verify and roll back.
        st.level[best_node] = best_level;
        if (++st.count[best_level] == st.cap) st.closed[best_level] = 1;
        st.recompute_ranges();
        if (!st.all_feasible()) {
            if (--st.count[best_level] < st.cap) st.closed[best_level] = 0;
            st.level[best_node] = -1;
            st.recompute_ranges();
            forbidden.insert({best_node, best_level});
            continue;
        }
        forbidden.clear();
        fruitless_growth = 0;
        --remaining;
    }

    out.level = st.level;
    for (int i = 0; i < g.size(); ++i)
        out.num_levels = std::max(out.num_levels, st.level[i] + 1);
    out.per_level_count.assign(out.num_levels, 0);
    for (int l : st.level) ++out.per_level_count[l];
    return out;
}

int enumeration_base(const Qidg& g, int n_max) {
    std::vector<int> width;
    for (int i = 0; i < g.size(); ++i) {
        int a = g.node(i).asap;
        if (a >= static_cast<int>(width.size())) width.resize(a + 1, 0);
        ++width[a];
    }
    int max_width = 0;
    for (int w : width) max_width = std::max(max_width, w);
    return std::min(n_max, max_width);
}

std::vector<ScheduleCandidate> schedule_enumerated(const Qidg& g,
                                                   const SchedulerConfig& cfg,
                                                   const std::vector<int>& floors) {
    std::vector<ScheduleCandidate> out;
    int base = enumeration_base(g, cfg.n_max);
    for (double alpha : cfg.alpha_set) {
        int n_m = std::max(1, static_cast<int>(std::ceil(alpha * base)));
        ScheduleCandidate cand;
        cand.alpha = alpha;
        cand.n_m = n_m;
        cand.schedule = fds_schedule(g, n_m, floors);
        out.push_back(std::move(cand));
    }
    return out;
}

int default_candidate(const std::vector<ScheduleCandidate>& candidates) {
    int best = -1;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const Schedule& s = candidates[i].schedule;
        int max_count = 0;
        for (int c : s.per_level_count) max_count = std::max(max_count, c);
        if (best < 0) { best = static_cast<int>(i); continue; }
        const Schedule& b = candidates[best].schedule;
        int b_max = 0;
        for (int c : b.per_level_count) b_max = std::max(b_max, c);
        if (std::tuple(s.num_levels, max_count) < std::tuple(b.num_levels, b_max))
            best = static_cast<int>(i);
    }
    return best;
}

int exact_oracle(const Qidg& g, int n_max) {
    if (g.empty()) return 0;
    if (g.size() > 16)
        throw Error("TooLarge", "exhaustive search capped at 16 nodes");
    if (n_max < 1) throw Error("Infeasible", "cap must be >= 1");

    const int n = g.size();
    std::vector<int> order = g.topological_order();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return g.node(a).asap < g.node(b).asap;
    });

    // Longest path to a sink, in levels.
    std::vector<int> height(n, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (int c : g.node(*it).children)
            height[*it] = std::max(height[*it], height[c] + 1);

    int lower = g.critical_path_levels();
    lower = std::max(lower, (n + n_max - 1) / n_max);

    std::vector<int> assigned(n, -1);
    for (int budget = lower; budget <= n; ++budget) {
        std::vector<int> level_count(budget, 0);
        auto dfs = [&](auto&& self, size_t idx) -> bool {
            if (idx == order.size()) return true;
            int node = order[idx];
            int lo = 0;
            for (int p : g.node(node).parents)
                lo = std::max(lo, assigned[p] + 1);
            int hi = budget - 1 - height[node];
            for (int l = lo; l <= hi; ++l) {
                if (level_count[l] >= n_max) continue;
                bool clash = false;
                for (int s : g.node(node).siblings)
                    if (assigned[s] == l) { clash = true; break; }
                if (clash) continue;
                assigned[node] = l;
                ++level_count[l];
                if (self(self, idx + 1)) return true;
                --level_count[l];
                assigned[node] = -1;
            }
            return false;
        };
        if (dfs(dfs, 0)) return budget;
    }
    throw Error("Infeasible", "no schedule within node-count horizon");
}

std::vector<std::string> validate_schedule(const Qidg& g, const Schedule& s,
                                           int n_cap) {
    std::vector<std::string> violations;
    auto flag = [&](const std::string& v) { violations.push_back(v); };

    if (static_cast<int>(s.level.size()) != g.size()) {
        flag("level map size does not match graph");
        return violations;
    }
    std::vector<int> count;
    for (int i = 0; i < g.size(); ++i) {
        int l = s.level[i];
        if (l < 0 || l >= s.num_levels)
            flag("instruction " + std::to_string(i + 1) + " has no single level");
        if (!s.deferral_floor.empty() && l < s.deferral_floor[i])
            flag("instruction " + std::to_string(i + 1) + " below its floor");
        if (l >= static_cast<int>(count.size())) count.resize(l + 1, 0);
        if (l >= 0) ++count[l];
    }
    for (size_t l = 0; l < count.size(); ++l)
        if (count[l] > n_cap)
            flag("level " + std::to_string(l) + " holds " + std::to_string(count[l]) +
                 " > cap " + std::to_string(n_cap));
    for (const QidgEdge& e : g.edges())
        if (s.level[e.to] - s.level[e.from] < 1)
            flag("precedence " + std::to_string(e.from + 1) + "->" +
                 std::to_string(e.to + 1) + " broken");
    for (int i = 0; i < g.size(); ++i)
        for (int j : g.node(i).siblings)
            if (i < j && s.level[i] == s.level[j])
                flag("siblings " + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                     " share level " + std::to_string(s.level[i]));
    return violations;
}

void dump_schedule(std::ostream& out, const Qidg& g, const Schedule& s) {
    out << "# instruction  opcode  level  (cap " << s.n_cap << ", levels "
        << s.num_levels << ")\n";
    for (int i = 0; i < g.size(); ++i) {
        out << i + 1 << '\t' << g.node(i).opcode;
        for (size_t k = 0; k < g.node(i).operands.size(); ++k)
            out << (k == 0 ? " " : ",") << g.qubits()[g.node(i).operands[k]].name;
        out << '\t' << s.level[i] << '\n';
    }
}

} // namespace ionmap
