#ifndef IONMAP_FABRIC_HPP
#define IONMAP_FABRIC_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ionmap/error.hpp"

namespace ionmap {

using WellId = int;

enum class WellKind { Basic, Creation, Interaction };

/// Cell-code grid for one fabric template ('.' empty, 'B' basic, 'C'
/// creation, 'I' interaction). Channels are implied between orthogonally
/// adjacent non-empty cells. The built-in table transcribes the reference
/// 11x11 primitive pattern; keeping it as data isolates that transcription.
struct TemplateLayout {
    int rows = 0;
    int cols = 0;
    std::vector<std::string> grid; // rows strings of length cols

    static TemplateLayout builtin();               // version v1
    static TemplateLayout from_text(std::string_view text);
    std::string to_text() const;

    char at(int r, int c) const { return grid[r][c]; }
};

struct FabricConfig {
    int ulb_n = 1;                    // ULB is ulb_n x ulb_n templates
    int well_capacity = 5;            // max co-resident qubits per well
    std::int64_t move_delay_us = 10;  // one hop through a channel
    std::int64_t one_qubit_delay_us = 50;
    std::int64_t two_qubit_delay_us = 100;

    std::int64_t duration_us(bool two_qubit) const {
        return two_qubit ? two_qubit_delay_us : one_qubit_delay_us;
    }
};

struct WellInfo {
    int row = 0;
    int col = 0;
    WellKind kind = WellKind::Basic;
    bool is_port = false;
};

/// Immutable grid of wells and half-duplex movement channels, tiled from a
/// template. Distance rows are BFS hop counts, computed lazily and cached
/// under a lock so concurrent flows can share one fabric.
class Fabric {
public:
    /// Tiles the template ulb_n x ulb_n and designates one I/O port per ULB
    /// edge at the boundary midpoint (shifted off interaction wells).
    /// Throws DisconnectedLayout / InvalidConfig on bad inputs.
    Fabric(const TemplateLayout& layout, const FabricConfig& config);

    const FabricConfig& config() const { return config_; }
    int grid_rows() const { return grid_rows_; }
    int grid_cols() const { return grid_cols_; }

    int well_count() const { return static_cast<int>(wells_.size()); }
    const WellInfo& well(WellId w) const { return wells_.at(w); }
    const std::vector<WellId>& neighbors(WellId w) const { return adjacency_[w]; }

    const std::vector<WellId>& interaction_wells() const { return interaction_; }
    const std::vector<WellId>& creation_wells() const { return creation_; }
    /// North, south, west, east ports, in that order.
    const std::vector<WellId>& ports() const { return ports_; }

    /// -1 when the cell is empty or out of range.
    WellId well_at(int row, int col) const;

    /// Shortest hop count through movement channels; >= manhattan(a, b).
    int physical_distance(WellId a, WellId b) const;
    /// move_delay x physical_distance.
    std::int64_t static_latency_us(WellId a, WellId b) const;
    /// Coordinate distance; the placement metric.
    int manhattan(WellId a, WellId b) const;

    /// BFS shortest path a -> b including both endpoints; deterministic
    /// (lowest-index predecessor wins).
    std::vector<WellId> shortest_path(WellId a, WellId b) const;

private:
    void check_well(WellId w) const;
    const std::vector<int>& distance_row(WellId source) const;

    FabricConfig config_;
    int grid_rows_ = 0;
    int grid_cols_ = 0;
    std::vector<WellInfo> wells_;
    std::vector<std::vector<WellId>> adjacency_;
    std::vector<WellId> cell_to_well_; // grid_rows*grid_cols, -1 for empty
    std::vector<WellId> interaction_;
    std::vector<WellId> creation_;
    std::vector<WellId> ports_;

    mutable std::mutex distance_mutex_;
    mutable std::vector<std::unique_ptr<std::vector<int>>> distance_rows_;
};

} // namespace ionmap

#endif
