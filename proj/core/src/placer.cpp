#include "ionmap/placer.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace ionmap {

double net_weight(int child_slack, int level_gap, double m_max) {
    int denom = child_slack + level_gap - 1;
    if (denom <= 0) return m_max;
    return std::min(m_max, 1.0 / denom);
}

std::vector<double> QuadraticSystem::solve(double tolerance,
                                           const std::vector<double>& warm_start) const {
    if (free_count == 0) return {};
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> triplets;
    triplets.reserve(nets.size() * 4 + anchors.size());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free_count);
    for (auto [i, j, w] : nets) {
        triplets.emplace_back(i, i, w);
        triplets.emplace_back(j, j, w);
        triplets.emplace_back(i, j, -w);
        triplets.emplace_back(j, i, -w);
    }
    for (auto [i, pos, w] : anchors) {
        triplets.emplace_back(i, i, w);
        rhs[i] += w * pos;
    }
    Eigen::SparseMatrix<double> mat(free_count, free_count);
    mat.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
        cg;
    cg.setTolerance(tolerance);
    cg.setMaxIterations(4 * free_count + 100);
    cg.compute(mat);
    if (cg.info() != Eigen::Success)
        throw Error("SingularSystem", "quadratic system is not SPD");
    Eigen::VectorXd x;
    if (static_cast<int>(warm_start.size()) == free_count) {
        Eigen::VectorXd w0 =
            Eigen::Map<const Eigen::VectorXd>(warm_start.data(), free_count);
        x = cg.solveWithGuess(rhs, w0);
    } else {
        x = cg.solve(rhs);
    }
    return {x.data(), x.data() + free_count};
}

double QuadraticSystem::objective(const std::vector<double>& x) const {
    double obj = 0.0;
    for (auto [i, j, w] : nets) obj += w * (x[i] - x[j]) * (x[i] - x[j]);
    for (auto [i, pos, w] : anchors) obj += w * (x[i] - pos) * (x[i] - pos);
    return obj;
}

BinGrid BinGrid::from_fabric(const Fabric& fabric) {
    BinGrid b;
    int n = fabric.config().ulb_n;
    b.rows = n;
    b.cols = n;
    b.bin_h = static_cast<double>(fabric.grid_rows()) / n;
    b.bin_w = static_cast<double>(fabric.grid_cols()) / n;
    b.capacity.assign(static_cast<size_t>(n) * n, 0);
    b.sites.assign(static_cast<size_t>(n) * n, {});
    for (WellId w : fabric.interaction_wells()) {
        const WellInfo& info = fabric.well(w);
        int bi = std::min(n - 1, static_cast<int>(info.row / b.bin_h));
        int bj = std::min(n - 1, static_cast<int>(info.col / b.bin_w));
        ++b.capacity[bi * n + bj];
        b.sites[bi * n + bj].emplace_back(info.col, info.row);
    }
    for (auto& s : b.sites)
        std::sort(s.begin(), s.end(), [](auto& a, auto& c) {
            return std::tie(a.second, a.first) < std::tie(c.second, c.first);
        });
    return b;
}

namespace {

struct Region {
    int r0, r1, c0, c1; // bin rectangle, half-open
};

void split_region(const BinGrid& bins, const Region& region,
                  std::vector<int> items,
                  const std::vector<std::pair<double, double>>& coords,
                  std::vector<std::pair<double, double>>& targets) {
    if (items.empty()) return;
    int nrows = region.r1 - region.r0, ncols = region.c1 - region.c0;
    if (nrows == 1 && ncols == 1) {
        std::sort(items.begin(), items.end(), [&](int a, int b) {
            return std::tuple(coords[a].first, coords[a].second, a) <
                   std::tuple(coords[b].first, coords[b].second, b);
        });
        const auto& sites = bins.sites[region.r0 * bins.cols + region.c0];
        double x0 = region.c0 * bins.bin_w, y0 = region.r0 * bins.bin_h;
        for (size_t k = 0; k < items.size(); ++k) {
            if (k < sites.size()) {
                targets[items[k]] = sites[k];
            } else if (!sites.empty()) {
                targets[items[k]] = sites[k % sites.size()];
            } else {
                targets[items[k]] = {x0 + (k + 0.5) * bins.bin_w / items.size(),
                                     y0 + 0.5 * bins.bin_h};
            }
        }
        return;
    }

    bool vertical = ncols >= nrows; // split columns when at least as wide
    Region left = region, right = region;
    if (vertical) {
        int mid = region.c0 + ncols / 2;
        left.c1 = mid;
        right.c0 = mid;
    } else {
        int mid = region.r0 + nrows / 2;
        left.r1 = mid;
        right.r0 = mid;
    }
    auto cap_of = [&](const Region& r) {
        int cap = 0;
        for (int i = r.r0; i < r.r1; ++i)
            for (int j = r.c0; j < r.c1; ++j) cap += bins.cap(i, j);
        return cap;
    };
    int cap_l = cap_of(left), cap_r = cap_of(right);
    int total = static_cast<int>(items.size());

    std::sort(items.begin(), items.end(), [&](int a, int b) {
        double pa = vertical ? coords[a].first : coords[a].second;
        double pb = vertical ? coords[b].first : coords[b].second;
        double sa = vertical ? coords[a].second : coords[a].first;
        double sb = vertical ? coords[b].second : coords[b].first;
        return std::tuple(pa, sa, a) < std::tuple(pb, sb, b);
    });
    int want = cap_l + cap_r > 0
                   ? static_cast<int>(std::llround(
                         static_cast<double>(total) * cap_l / (cap_l + cap_r)))
                   : 0;
    int take = std::clamp(want, std::max(0, total - cap_r), std::min(cap_l, total));
    std::vector<int> first(items.begin(), items.begin() + take);
    std::vector<int> second(items.begin() + take, items.end());
    split_region(bins, left, std::move(first), coords, targets);
    split_region(bins, right, std::move(second), coords, targets);
}

} // namespace

std::vector<std::pair<double, double>> spread_level(
    const BinGrid& bins, const std::vector<std::pair<double, double>>& coords) {
    std::vector<std::pair<double, double>> targets = coords;
    if (coords.empty()) return targets;

    int total_cap = std::accumulate(bins.capacity.begin(), bins.capacity.end(), 0);
    if (static_cast<int>(coords.size()) > total_cap)
        throw Error("Overcapacity",
                    std::to_string(coords.size()) + " instructions for " +
                        std::to_string(total_cap) + " slots");

    std::vector<int> occupancy(bins.capacity.size(), 0);
    for (const auto& [x, y] : coords) {
        int bi = std::clamp(static_cast<int>(y / bins.bin_h), 0, bins.rows - 1);
        int bj = std::clamp(static_cast<int>(x / bins.bin_w), 0, bins.cols - 1);
        ++occupancy[bi * bins.cols + bj];
    }
    bool overfull = false;
    for (size_t b = 0; b < occupancy.size(); ++b)
        if (occupancy[b] > bins.capacity[b]) overfull = true;
    if (!overfull) return targets;

    std::vector<int> items(coords.size());
    std::iota(items.begin(), items.end(), 0);
    split_region(bins, {0, bins.rows, 0, bins.cols}, std::move(items), coords,
                 targets);
    return targets;
}

std::vector<WellId> assign_interaction_wells(
    const Fabric& fabric, const std::vector<std::pair<double, double>>& coords) {
    const std::vector<WellId>& wells = fabric.interaction_wells();
    struct Entry {
        double dist;
        int item;
        WellId well;
    };
    std::vector<Entry> entries;
    entries.reserve(coords.size() * wells.size());
    for (size_t i = 0; i < coords.size(); ++i)
        for (WellId w : wells) {
            const WellInfo& info = fabric.well(w);
            double d = std::abs(coords[i].first - info.col) +
                       std::abs(coords[i].second - info.row);
            entries.push_back({d, static_cast<int>(i), w});
        }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::tuple(a.dist, a.item, a.well) < std::tuple(b.dist, b.item, b.well);
    });
    std::vector<WellId> out(coords.size(), -1);
    std::vector<char> taken(fabric.well_count(), 0);
    size_t assigned = 0;
    for (const Entry& e : entries) {
        if (assigned == coords.size()) break;
        if (out[e.item] >= 0 || taken[e.well]) continue;
        out[e.item] = e.well;
        taken[e.well] = 1;
        ++assigned;
    }
    if (assigned != coords.size())
        throw Error("Overcapacity", "more same-level instructions than wells");
    return out;
}

std::int64_t predicted_start_us(
    const Fabric& fabric, WellId well,
    const std::vector<std::pair<WellId, std::int64_t>>& parent_finishes,
    const std::vector<WellId>& first_use_origins) {
    std::int64_t t = 0;
    for (auto [pw, finish] : parent_finishes)
        t = std::max(t, finish + fabric.static_latency_us(pw, well));
    for (WellId origin : first_use_origins)
        t = std::max(t, fabric.static_latency_us(origin, well));
    return t;
}

void dump_placement(std::ostream& out, const Qidg& g, const Placement& placement,
                    const Fabric& fabric, bool visual) {
    out << "# instruction  opcode  level  well  x  y  start_us\n";
    for (int i = 0; i < g.size(); ++i) {
        const WellInfo& info = fabric.well(placement.instruction_well[i]);
        out << i + 1 << '\t' << g.node(i).opcode << '\t'
            << placement.schedule.level[i] << "\t(" << info.row << ',' << info.col
            << ")\t" << std::fixed << std::setprecision(2)
            << placement.coords[i].first << '\t' << placement.coords[i].second
            << '\t' << placement.predicted_start_us[i] << '\n';
    }
    if (!visual || fabric.grid_cols() > 64) return;
    for (int level = 0; level < placement.schedule.num_levels; ++level) {
        out << "# level " << level << '\n';
        std::vector<std::string> rows(fabric.grid_rows(),
                                      std::string(fabric.grid_cols(), ' '));
        for (WellId w = 0; w < fabric.well_count(); ++w) {
            const WellInfo& info = fabric.well(w);
            char c = info.kind == WellKind::Interaction ? 'i'
                     : info.kind == WellKind::Creation  ? 'c'
                                                        : '.';
            rows[info.row][info.col] = c;
        }
        for (int i = 0; i < g.size(); ++i) {
            if (placement.schedule.level[i] != level) continue;
            const WellInfo& info = fabric.well(placement.instruction_well[i]);
            rows[info.row][info.col] = static_cast<char>('A' + (i % 26));
        }
        for (const std::string& row : rows) out << row << '\n';
    }
}

std::vector<std::vector<int>> qubit_access_order(const Qidg& g,
                                                 const Schedule& schedule) {
    std::vector<std::vector<int>> order(g.qubit_count());
    for (int q = 0; q < g.qubit_count(); ++q) {
        order[q] = g.qubit_accessors(q);
        std::stable_sort(order[q].begin(), order[q].end(), [&](int a, int b) {
            return std::tuple(schedule.level[a], a) < std::tuple(schedule.level[b], b);
        });
        order[q].erase(std::unique(order[q].begin(), order[q].end()), order[q].end());
    }
    return order;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Driver state for the variable-level loop.
struct PlacerState {
    const Fabric& fabric;
    const PlacerConfig& cfg;
    Qidg work; // copy with horizon-matched levelization for net weights
    Schedule sched;
    std::vector<int> floors;
    std::vector<char> frozen;
    std::vector<WellId> well;
    std::vector<std::int64_t> start_us;
    std::vector<std::pair<double, double>> coords;
    std::vector<std::pair<double, double>> pseudo_pos;
    std::vector<double> pseudo_w;
    std::vector<std::int64_t> well_busy_until;
    std::vector<WellId> io_in_port, io_out_port;
    std::vector<std::vector<int>> access_order;
    BinGrid bins;
    double slot_start = 0.0;
    int defer_count = 0;
    int reschedule_count = 0;

    PlacerState(const Qidg& g, const Schedule& s, const Fabric& f,
                const PlacerConfig& c, std::uint64_t seed)
        : fabric(f), cfg(c), work(g), sched(s),
          floors(s.deferral_floor.empty() ? std::vector<int>(g.size(), 0)
                                          : s.deferral_floor),
          frozen(g.size(), 0), well(g.size(), -1), start_us(g.size(), 0),
          pseudo_pos(g.size(), {0, 0}), pseudo_w(g.size(), 0.0),
          well_busy_until(f.well_count(), 0),
          bins(BinGrid::from_fabric(f)) {
        work.levelize(sched.num_levels);
        access_order = qubit_access_order(work, sched);
        double cx = (f.grid_cols() - 1) / 2.0, cy = (f.grid_rows() - 1) / 2.0;
        coords.resize(g.size());
        for (int i = 0; i < g.size(); ++i) {
            std::uint64_t h = splitmix64(seed * 0x100000001b3ull + i);
            double jx = ((h & 0xffff) / 65535.0 - 0.5) * 0.9;
            double jy = (((h >> 16) & 0xffff) / 65535.0 - 0.5) * 0.9;
            coords[i] = {cx + jx, cy + jy};
        }
    }

    bool is_first_use(int node, int qubit) const {
        return !access_order[qubit].empty() && access_order[qubit].front() == node;
    }
    bool is_last_use(int node, int qubit) const {
        return !access_order[qubit].empty() && access_order[qubit].back() == node;
    }

    WellId nearest_creation_to_point(double x, double y) const {
        WellId best = -1;
        double best_d = 0;
        for (WellId c : fabric.creation_wells()) {
            const WellInfo& info = fabric.well(c);
            double d = std::abs(x - info.col) + std::abs(y - info.row);
            if (best < 0 || d < best_d) best = c, best_d = d;
        }
        return best;
    }

    // One quadratic solve over all unfrozen instructions, both axes.
    void global_solve() {
        std::vector<int> free_of(work.size(), -1);
        std::vector<int> nodes;
        for (int i = 0; i < work.size(); ++i)
            if (!frozen[i]) free_of[i] = static_cast<int>(nodes.size()), nodes.push_back(i);
        if (nodes.empty()) return;

        QuadraticSystem sx, sy;
        sx.free_count = sy.free_count = static_cast<int>(nodes.size());
        auto add_net = [&](int a, int b, double w) {
            // a, b node ids; at least one free
            if (free_of[a] >= 0 && free_of[b] >= 0) {
                sx.nets.emplace_back(free_of[a], free_of[b], w);
                sy.nets.emplace_back(free_of[a], free_of[b], w);
            } else if (free_of[a] >= 0 || free_of[b] >= 0) {
                int fn = free_of[a] >= 0 ? a : b;
                int fx = free_of[a] >= 0 ? b : a;
                const WellInfo& info = fabric.well(well[fx]);
                sx.anchors.emplace_back(free_of[fn], static_cast<double>(info.col), w);
                sy.anchors.emplace_back(free_of[fn], static_cast<double>(info.row), w);
            }
        };
        auto add_point = [&](int node, double x, double y, double w) {
            sx.anchors.emplace_back(free_of[node], x, w);
            sy.anchors.emplace_back(free_of[node], y, w);
        };

        for (const QidgEdge& e : work.edges()) {
            if (frozen[e.from] && frozen[e.to]) continue;
            int slack = work.node(e.to).alap - work.node(e.to).asap;
            int gap = sched.level[e.to] - sched.level[e.from];
            add_net(e.from, e.to, net_weight(slack, gap, cfg.m_max));
        }
        // First/last-use pulls: entry ports for I/O qubits, the nearest
        // creation well (re-targeted each solve) for ancillas, exit ports.
        for (int q = 0; q < work.qubit_count(); ++q) {
            if (access_order[q].empty()) continue;
            int first = access_order[q].front();
            int last = access_order[q].back();
            bool io = work.qubits()[q].kind == QubitKind::IO;
            if (!frozen[first]) {
                int slack = work.node(first).alap - work.node(first).asap;
                double w = net_weight(slack, 1, cfg.m_max);
                WellId origin = io ? io_in_port[q]
                                   : nearest_creation_to_point(coords[first].first,
                                                               coords[first].second);
                if (origin >= 0) {
                    const WellInfo& info = fabric.well(origin);
                    add_point(first, info.col, info.row, w);
                }
            }
            if (io && !frozen[last] && io_out_port[q] >= 0) {
                int slack = work.node(last).alap - work.node(last).asap;
                const WellInfo& info = fabric.well(io_out_port[q]);
                add_point(last, info.col, info.row,
                          net_weight(slack, 1, cfg.m_max));
            }
        }
        for (int i = 0; i < work.size(); ++i)
            if (!frozen[i] && pseudo_w[i] > 0)
                add_point(i, pseudo_pos[i].first, pseudo_pos[i].second, pseudo_w[i]);

        // Components with no fixed attachment get a weak center anchor so
        // both systems stay SPD.
        {
            std::vector<int> parent(nodes.size());
            std::iota(parent.begin(), parent.end(), 0);
            auto find = [&](int v) {
                while (parent[v] != v) v = parent[v] = parent[parent[v]];
                return v;
            };
            for (auto [i, j, w] : sx.nets) parent[find(i)] = find(j);
            std::vector<char> anchored(nodes.size(), 0);
            for (auto [i, pos, w] : sx.anchors) anchored[find(i)] = 1;
            double cx = (fabric.grid_cols() - 1) / 2.0;
            double cy = (fabric.grid_rows() - 1) / 2.0;
            std::vector<char> fixed_up(nodes.size(), 0);
            for (size_t k = 0; k < nodes.size(); ++k) {
                int root = find(static_cast<int>(k));
                if (!anchored[root] && !fixed_up[root]) {
                    sx.anchors.emplace_back(root, cx, 1e-6);
                    sy.anchors.emplace_back(root, cy, 1e-6);
                    fixed_up[root] = 1;
                }
            }
        }

        std::vector<double> wx(nodes.size()), wy(nodes.size());
        for (size_t k = 0; k < nodes.size(); ++k) {
            wx[k] = coords[nodes[k]].first;
            wy[k] = coords[nodes[k]].second;
        }
        std::vector<double> x = sx.solve(cfg.cg_tolerance, wx);
        std::vector<double> y = sy.solve(cfg.cg_tolerance, wy);
        for (size_t k = 0; k < nodes.size(); ++k)
            coords[nodes[k]] = {x[k], y[k]};
    }

    std::vector<int> level_members(int level) const {
        std::vector<int> out;
        for (int i = 0; i < work.size(); ++i)
            if (!frozen[i] && sched.level[i] == level && floors[i] <= level)
                out.push_back(i);
        return out;
    }

    // QIPP-FIL for one level: solve, spread the level, anchor moved
    // instructions, re-solve until stable, then pick wells greedily.
    std::vector<WellId> run_level_pass(int level, std::vector<int>& members) {
        global_solve();
        members = level_members(level);
        if (members.empty()) return {};

        double growth = cfg.pseudo_weight_base;
        for (int iter = 0; iter < cfg.max_global_iters; ++iter) {
            std::vector<std::pair<double, double>> pts;
            pts.reserve(members.size());
            for (int i : members) pts.push_back(coords[i]);
            std::vector<std::pair<double, double>> targets = spread_level(bins, pts);
            bool moved = false;
            for (size_t k = 0; k < members.size(); ++k) {
                double dx = targets[k].first - pts[k].first;
                double dy = targets[k].second - pts[k].second;
                if (dx * dx + dy * dy > 0.25) {
                    moved = true;
                    pseudo_pos[members[k]] = targets[k];
                    pseudo_w[members[k]] = growth;
                }
            }
            if (!moved) break;
            growth *= cfg.pseudo_weight_growth;
            global_solve();
        }
        std::vector<std::pair<double, double>> pts;
        for (int i : members) pts.push_back(coords[i]);
        return assign_interaction_wells(fabric, pts);
    }

    // Re-run the scheduler with raised floors; finalized instructions keep
    // their levels, floating ones may not cross back below the frontier.
    void reschedule(int frontier) {
        std::vector<int> pinned(work.size(), -1);
        std::vector<int> fl = floors;
        for (int i = 0; i < work.size(); ++i) {
            if (frozen[i]) pinned[i] = sched.level[i];
            else fl[i] = std::max(fl[i], frontier);
        }
        sched = fds_schedule(work, sched.n_cap, fl, pinned);
        ++reschedule_count;
        work.levelize(sched.num_levels);
        access_order = qubit_access_order(work, sched);
    }

    // Expected extent of one slot: slowest instruction plus the median
    // static qubit-arrival latency into the level.
    double slot_length(const std::vector<int>& members,
                       const std::vector<WellId>& wells) const {
        if (members.empty())
            return static_cast<double>(std::min(fabric.config().one_qubit_delay_us,
                                                fabric.config().two_qubit_delay_us));
        std::int64_t max_dur = 0;
        std::vector<std::int64_t> legs;
        for (size_t k = 0; k < members.size(); ++k) {
            int i = members[k];
            max_dur = std::max(max_dur, work.node(i).duration_us);
            for (int p : work.node(i).parents)
                if (frozen[p])
                    legs.push_back(fabric.static_latency_us(well[p], wells[k]));
            for (WellId o : origins_for(i, wells[k]))
                if (o >= 0) legs.push_back(fabric.static_latency_us(o, wells[k]));
        }
        std::int64_t median = 0;
        if (!legs.empty()) {
            std::sort(legs.begin(), legs.end());
            median = legs[(legs.size() - 1) / 2];
        }
        return static_cast<double>(max_dur + median);
    }

    std::vector<WellId> origins_for(int node, WellId target) const {
        std::vector<WellId> out;
        for (int q : work.node(node).operands) {
            if (!is_first_use(node, q)) continue;
            if (work.qubits()[q].kind == QubitKind::IO) {
                if (io_in_port[q] >= 0) out.push_back(io_in_port[q]);
            } else {
                WellId best = -1;
                std::int64_t best_lat = 0;
                for (WellId c : fabric.creation_wells()) {
                    std::int64_t lat = fabric.static_latency_us(c, target);
                    if (best < 0 || lat < best_lat) best = c, best_lat = lat;
                }
                out.push_back(best);
            }
        }
        return out;
    }

    std::int64_t predict(int node, WellId target) const {
        std::vector<std::pair<WellId, std::int64_t>> parents;
        for (int p : work.node(node).parents)
            parents.emplace_back(well[p], start_us[p] + work.node(p).duration_us);
        std::int64_t t =
            predicted_start_us(fabric, target, parents, origins_for(node, target));
        // A well in use by an earlier instruction serializes its successors.
        return std::max(t, well_busy_until[target]);
    }
};

} // namespace

Placement place_instructions(const Qidg& g, const Schedule& schedule,
                             const Fabric& fabric, const PlacerConfig& cfg,
                             std::uint64_t seed) {
    // Simultaneous ancilla creation: every declared ancilla needs its own
    // creation well.
    {
        int ancillas = 0;
        for (const QubitDecl& q : g.qubits())
            if (q.kind == QubitKind::Ancilla) ++ancillas;
        if (ancillas > static_cast<int>(fabric.creation_wells().size()))
            throw Error("NoCreationWell",
                        std::to_string(ancillas) + " ancilla qubits for " +
                            std::to_string(fabric.creation_wells().size()) +
                            " creation wells");
    }

    PlacerState st(g, schedule, fabric, cfg, seed);
    st.io_in_port.assign(g.qubit_count(), -1);
    st.io_out_port.assign(g.qubit_count(), -1);

    Placement out;
    out.qubit_origin.assign(g.qubit_count(), -1);
    out.io_exit_port.assign(g.qubit_count(), -1);

    if (!g.empty()) {
        // Bootstrap solve (no I/O pulls yet), then bind each I/O qubit to the
        // boundary port nearest its first/last use. Ports stay fixed after.
        st.global_solve();
        for (int q = 0; q < g.qubit_count(); ++q) {
            if (g.qubits()[q].kind != QubitKind::IO) continue;
            auto nearest_port = [&](double x, double y) {
                WellId best = fabric.ports()[0];
                double best_d = 1e18;
                for (WellId p : fabric.ports()) {
                    const WellInfo& info = fabric.well(p);
                    double d = std::abs(x - info.col) + std::abs(y - info.row);
                    if (d < best_d) best = p, best_d = d;
                }
                return best;
            };
            double cx = (fabric.grid_cols() - 1) / 2.0;
            double cy = (fabric.grid_rows() - 1) / 2.0;
            if (st.access_order[q].empty()) {
                st.io_in_port[q] = nearest_port(cx, cy);
                st.io_out_port[q] = st.io_in_port[q];
            } else {
                auto [fx, fy] = st.coords[st.access_order[q].front()];
                auto [lx, ly] = st.coords[st.access_order[q].back()];
                st.io_in_port[q] = nearest_port(fx, fy);
                st.io_out_port[q] = nearest_port(lx, ly);
            }
        }

        int initial_levels = std::max(1, st.sched.num_levels);
        int floor_cap = cfg.horizon_factor * initial_levels;
        int pending = 0;
        double pending_slack = 0.0;

        auto drop_deferred = [&](std::vector<int>& members, std::vector<WellId>& wells,
                                 int level) {
            std::vector<int> keep;
            std::vector<WellId> keep_wells;
            for (size_t k = 0; k < members.size(); ++k)
                if (st.floors[members[k]] <= level) {
                    keep.push_back(members[k]);
                    keep_wells.push_back(wells[k]);
                }
            members = std::move(keep);
            wells = std::move(keep_wells);
        };

        for (int level = 0; level < st.sched.num_levels; ++level) {
            std::vector<int> members;
            std::vector<WellId> wells = st.run_level_pass(level, members);

            auto defer = [&](int i) {
                if (level + 1 > floor_cap)
                    throw Error("HorizonExceeded",
                                "deferral floors exceeded " +
                                    std::to_string(floor_cap) + " levels");
                st.floors[i] = level + 1;
                st.pseudo_w[i] = 0.0;
                ++st.defer_count;
                ++pending;
            };

            // Batched mode can leave a parent floating; its children cannot
            // be timed yet and follow it out of this level.
            for (int i : members)
                for (int p : st.work.node(i).parents)
                    if (!st.frozen[p]) {
                        defer(i);
                        break;
                    }
            drop_deferred(members, wells, level);

            if (cfg.defer_enabled && !members.empty()) {
                double threshold =
                    st.slot_start + 0.5 * st.slot_length(members, wells);
                for (size_t k = 0; k < members.size(); ++k) {
                    std::int64_t tmin = st.predict(members[k], wells[k]);
                    if (static_cast<double>(tmin) > threshold) {
                        defer(members[k]);
                        pending_slack += static_cast<double>(tmin) - threshold;
                    }
                }
                drop_deferred(members, wells, level);
            }

            if (pending > 0 && (pending >= cfg.defer_batch_count ||
                                pending_slack >= cfg.defer_batch_slack_us)) {
                st.reschedule(level);
                pending = 0;
                pending_slack = 0.0;
                // One re-placement of the level; survivors freeze unchecked.
                wells = st.run_level_pass(level, members);
            }

            for (size_t k = 0; k < members.size(); ++k) {
                int i = members[k];
                st.frozen[i] = 1;
                st.well[i] = wells[k];
                st.start_us[i] = st.predict(i, wells[k]);
                const WellInfo& info = fabric.well(wells[k]);
                st.coords[i] = {static_cast<double>(info.col),
                                static_cast<double>(info.row)};
                st.pseudo_w[i] = 0.0;
                st.well_busy_until[wells[k]] =
                    std::max(st.well_busy_until[wells[k]],
                             st.start_us[i] + st.work.node(i).duration_us);
            }

            st.slot_start += st.slot_length(members, wells);

            // Leftover batched deferrals at the end force one reschedule.
            if (level + 1 == st.sched.num_levels && pending > 0) {
                st.reschedule(level + 1);
                pending = 0;
                pending_slack = 0.0;
            }
        }
    }

    // Ancillas: nearest free creation well to the first-using instruction,
    // in order of predicted first use.
    {
        std::vector<std::tuple<std::int64_t, int, int>> anc; // (start, instr, qubit)
        for (int q = 0; q < g.qubit_count(); ++q) {
            if (g.qubits()[q].kind != QubitKind::Ancilla) continue;
            if (st.access_order[q].empty()) {
                anc.emplace_back(std::numeric_limits<std::int64_t>::max(), g.size(), q);
            } else {
                int first = st.access_order[q].front();
                anc.emplace_back(st.start_us[first], first, q);
            }
        }
        std::sort(anc.begin(), anc.end());
        std::vector<char> used(fabric.well_count(), 0);
        for (auto [start, first, q] : anc) {
            WellId best = -1;
            std::int64_t best_lat = 0;
            for (WellId c : fabric.creation_wells()) {
                if (used[c]) continue;
                std::int64_t lat = first < g.size()
                                       ? fabric.static_latency_us(c, st.well[first])
                                       : 0;
                if (best < 0 || lat < best_lat) best = c, best_lat = lat;
            }
            if (best < 0)
                throw Error("NoCreationWell",
                            "ran out of creation wells for ancilla " +
                                g.qubits()[q].name);
            used[best] = 1;
            out.qubit_origin[q] = best;
        }
    }
    for (int q = 0; q < g.qubit_count(); ++q)
        if (g.qubits()[q].kind == QubitKind::IO) {
            out.qubit_origin[q] = st.io_in_port[q];
            out.io_exit_port[q] = st.io_out_port[q];
        }

    out.schedule = st.sched;
    out.instruction_well = st.well;
    out.coords = st.coords;
    out.predicted_start_us = st.start_us;
    out.defer_count = st.defer_count;
    out.reschedule_count = st.reschedule_count;
    return out;
}

} // namespace ionmap
