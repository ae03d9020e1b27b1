#include "ionmap/fabric.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <sstream>

namespace ionmap {

namespace {

// Roads on rows/cols {0,5,10}; two interaction wells at (0,5) and (5,0)
// (closest pair 10 hops apart, also the global minimum once tiled) and four
// creation wells spread along the roads.
constexpr const char* kBuiltinRows[] = {
    "BBCBBIBBBBB",
    "B....B....B",
    "B....B....C",
    "B....B....B",
    "B....B....B",
    "IBBBBBBBBBB",
    "B....B....B",
    "B....B....B",
    "C....B....B",
    "B....B....B",
    "BBBBBBBBCBB",
};

} // namespace

TemplateLayout TemplateLayout::builtin() {
    TemplateLayout t;
    for (const char* row : kBuiltinRows) t.grid.emplace_back(row);
    t.rows = static_cast<int>(t.grid.size());
    t.cols = static_cast<int>(t.grid[0].size());
    return t;
}

TemplateLayout TemplateLayout::from_text(std::string_view text) {
    TemplateLayout t;
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        for (char c : line)
            if (c != '.' && c != 'B' && c != 'C' && c != 'I')
                throw Error("MalformedLayout",
                            std::string("unknown cell code '") + c + "'");
        t.grid.push_back(line);
    }
    if (t.grid.empty()) throw Error("MalformedLayout", "no rows");
    t.rows = static_cast<int>(t.grid.size());
    t.cols = static_cast<int>(t.grid[0].size());
    for (const std::string& row : t.grid)
        if (static_cast<int>(row.size()) != t.cols)
            throw Error("MalformedLayout", "ragged rows");
    return t;
}

std::string TemplateLayout::to_text() const {
    std::string out;
    for (const std::string& row : grid) {
        out += row;
        out += '\n';
    }
    return out;
}

Fabric::Fabric(const TemplateLayout& layout, const FabricConfig& config)
    : config_(config) {
    if (config.ulb_n < 1 || config.move_delay_us <= 0 ||
        config.one_qubit_delay_us <= 0 || config.two_qubit_delay_us <= 0)
        throw Error("InvalidConfig", "fabric parameters must be positive");
    if (config.well_capacity < 2)
        throw Error("InvalidConfig", "well capacity must be at least 2");

    grid_rows_ = layout.rows * config.ulb_n;
    grid_cols_ = layout.cols * config.ulb_n;
    cell_to_well_.assign(static_cast<size_t>(grid_rows_) * grid_cols_, -1);

    for (int r = 0; r < grid_rows_; ++r) {
        for (int c = 0; c < grid_cols_; ++c) {
            char code = layout.at(r % layout.rows, c % layout.cols);
            if (code == '.') continue;
            WellInfo info;
            info.row = r;
            info.col = c;
            info.kind = code == 'C'   ? WellKind::Creation
                        : code == 'I' ? WellKind::Interaction
                                      : WellKind::Basic;
            cell_to_well_[static_cast<size_t>(r) * grid_cols_ + c] =
                static_cast<WellId>(wells_.size());
            wells_.push_back(info);
        }
    }
    if (wells_.empty()) throw Error("MalformedLayout", "layout has no wells");

    adjacency_.resize(wells_.size());
    for (WellId w = 0; w < well_count(); ++w) {
        int r = wells_[w].row, c = wells_[w].col;
        for (auto [dr, dc] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
            WellId n = well_at(r + dr, c + dc);
            if (n >= 0) adjacency_[w].push_back(n);
        }
        std::sort(adjacency_[w].begin(), adjacency_[w].end());
    }

    // Connectivity check doubles as validation of user-supplied layouts.
    {
        std::vector<char> seen(wells_.size(), 0);
        std::deque<WellId> q{0};
        seen[0] = 1;
        size_t reached = 1;
        while (!q.empty()) {
            WellId w = q.front();
            q.pop_front();
            for (WellId n : adjacency_[w])
                if (!seen[n]) seen[n] = 1, ++reached, q.push_back(n);
        }
        if (reached != wells_.size())
            throw Error("DisconnectedLayout",
                        "layout graph is not connected (" +
                            std::to_string(reached) + "/" +
                            std::to_string(wells_.size()) + " wells reachable)");
    }

    for (WellId w = 0; w < well_count(); ++w) {
        if (wells_[w].kind == WellKind::Interaction) interaction_.push_back(w);
        if (wells_[w].kind == WellKind::Creation) creation_.push_back(w);
    }

    // One port per ULB edge at the boundary midpoint; if the midpoint cell is
    // missing or an interaction well, slide along the edge to the nearest
    // usable cell, falling back to the closest usable well anywhere.
    auto pick_port = [&](bool along_row, int fixed) -> WellId {
        int extent = along_row ? grid_cols_ : grid_rows_;
        int mid = extent / 2;
        for (int off = 0; off < extent; ++off) {
            for (int s : {mid + off, mid - off}) {
                if (s < 0 || s >= extent) continue;
                WellId w = along_row ? well_at(fixed, s) : well_at(s, fixed);
                if (w >= 0 && wells_[w].kind != WellKind::Interaction) return w;
                if (off == 0) break;
            }
        }
        int mr = along_row ? fixed : mid;
        int mc = along_row ? mid : fixed;
        WellId best = -1;
        long best_d = 0;
        for (WellId w = 0; w < well_count(); ++w) {
            if (wells_[w].kind == WellKind::Interaction) continue;
            long d = std::abs(wells_[w].row - mr) + std::abs(wells_[w].col - mc);
            if (best < 0 || d < best_d) best = w, best_d = d;
        }
        if (best < 0) throw Error("MalformedLayout", "no usable port cell");
        return best;
    };
    ports_ = {pick_port(true, 0), pick_port(true, grid_rows_ - 1),
              pick_port(false, 0), pick_port(false, grid_cols_ - 1)};
    for (WellId p : ports_) wells_[p].is_port = true;

    distance_rows_.resize(wells_.size());
}

WellId Fabric::well_at(int row, int col) const {
    if (row < 0 || row >= grid_rows_ || col < 0 || col >= grid_cols_) return -1;
    return cell_to_well_[static_cast<size_t>(row) * grid_cols_ + col];
}

void Fabric::check_well(WellId w) const {
    if (w < 0 || w >= well_count())
        throw Error("UnknownWell", "well id " + std::to_string(w));
}

const std::vector<int>& Fabric::distance_row(WellId source) const {
    std::lock_guard<std::mutex> lock(distance_mutex_);
    auto& row = distance_rows_[source];
    if (!row) {
        row = std::make_unique<std::vector<int>>(wells_.size(), -1);
        std::deque<WellId> q{source};
        (*row)[source] = 0;
        while (!q.empty()) {
            WellId w = q.front();
            q.pop_front();
            for (WellId n : adjacency_[w])
                if ((*row)[n] < 0) (*row)[n] = (*row)[w] + 1, q.push_back(n);
        }
    }
    return *row;
}

int Fabric::physical_distance(WellId a, WellId b) const {
    check_well(a);
    check_well(b);
    return distance_row(a)[b];
}

std::int64_t Fabric::static_latency_us(WellId a, WellId b) const {
    return config_.move_delay_us * physical_distance(a, b);
}

int Fabric::manhattan(WellId a, WellId b) const {
    check_well(a);
    check_well(b);
    return std::abs(wells_[a].row - wells_[b].row) +
           std::abs(wells_[a].col - wells_[b].col);
}

std::vector<WellId> Fabric::shortest_path(WellId a, WellId b) const {
    check_well(a);
    check_well(b);
    if (a == b) return {a};
    std::vector<WellId> pred(wells_.size(), -1);
    std::deque<WellId> q{a};
    pred[a] = a;
    while (!q.empty()) {
        WellId w = q.front();
        q.pop_front();
        if (w == b) break;
        for (WellId n : adjacency_[w])
            if (pred[n] < 0) pred[n] = w, q.push_back(n);
    }
    std::vector<WellId> path;
    for (WellId w = b; w != a; w = pred[w]) path.push_back(w);
    path.push_back(a);
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace ionmap
