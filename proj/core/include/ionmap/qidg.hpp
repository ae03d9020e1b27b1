#ifndef IONMAP_QIDG_HPP
#define IONMAP_QIDG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ionmap/fabric.hpp"
#include "ionmap/qasm.hpp"

namespace ionmap {

/// Dependency edge tags; one edge may carry several (a two-qubit target both
/// reads and writes its qubit, so a single arc can be RAW and WAW at once).
enum DepKind : unsigned {
    kDepRaw = 1u << 0,
    kDepWaw = 1u << 1,
    kDepWar = 1u << 2,
    kDepAux = 1u << 3,
};

struct QidgEdge {
    int from = 0;
    int to = 0;
    unsigned kinds = 0;
};

struct QidgNode {
    std::string opcode;
    std::vector<int> operands;     // qubit indices, control first
    std::int64_t duration_us = 0;
    bool two_qubit = false;

    std::vector<int> parents;
    std::vector<int> children;
    std::vector<int> siblings;     // sorted; filled by compute_sibling_sets

    int asap = 0;
    int alap = 0;
    double mobility = 0.0;         // 1/(alap-asap), saturated on zero slack
};

/// Quantum instruction dependency graph. Nodes follow program instruction
/// order (0-based; RawInstruction.index == node + 1). RAW/WAW/WAR edges come
/// from per-qubit adjacent accesses (transitive reduction per qubit); AUX
/// edges are added by scheduler preprocessing and keep the graph acyclic.
class Qidg {
public:
    static constexpr double kMobilitySaturation = 1e6;

    /// Derives accesses from operand roles: the control (first of two)
    /// operand reads its qubit, the target reads and writes it.
    static Qidg build(const Program& program, const FabricConfig& config,
                      const OpcodeRegistry& registry = OpcodeRegistry::standard());

    int size() const { return static_cast<int>(nodes_.size()); }
    bool empty() const { return nodes_.empty(); }
    const QidgNode& node(int i) const { return nodes_.at(i); }
    const std::vector<QidgEdge>& edges() const { return edges_; }
    const std::vector<QubitDecl>& qubits() const { return qubits_; }
    int qubit_count() const { return static_cast<int>(qubits_.size()); }

    /// Per-qubit access chain in program order (every accessor, reads and
    /// writes alike).
    const std::vector<int>& qubit_accessors(int qubit) const {
        return accessors_.at(qubit);
    }

    bool has_edge(int from, int to) const;
    unsigned edge_kinds(int from, int to) const;

    /// Inserts an AUX ordering edge (or tags an existing edge AUX). Throws
    /// CycleDetected if `to` already reaches `from`.
    void add_aux_edge(int from, int to);

    /// Longest-path levels: asap from sources, alap against the horizon
    /// (critical-path length unless a larger horizon is given), mobility
    /// 1/(alap-asap) saturated at kMobilitySaturation.
    void levelize(int horizon_levels = 0);
    int critical_path_levels() const { return critical_levels_; }

    /// Mutual-sibling relation: two nodes co-accessing a qubit with neither
    /// reachable from the other. Symmetric; recomputed from scratch.
    void compute_sibling_sets();

    bool reaches(int from, int to) const;
    /// Topological order (stable: by asap-independent DFS on node index).
    std::vector<int> topological_order() const;

    /// Node list + edge list with tags, DOT syntax, deterministic order.
    void dump_dot(std::ostream& out) const;

private:
    void check_acyclic() const;

    std::vector<QidgNode> nodes_;
    std::vector<QidgEdge> edges_;
    std::vector<QubitDecl> qubits_;
    std::vector<std::vector<int>> accessors_;
    int critical_levels_ = 0;
};

} // namespace ionmap

#endif
