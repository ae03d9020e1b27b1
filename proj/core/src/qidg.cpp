#include "ionmap/qidg.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

namespace ionmap {

namespace {

struct Access {
    bool reads = false;
    bool writes = false;
};

// Control operand reads; target operand (single operand, or second of two)
// reads and writes.
Access access_role(const QidgNode& node, size_t operand_pos) {
    if (node.operands.size() == 2 && operand_pos == 0) return {true, false};
    (void)node;
    return {true, true};
}

} // namespace

Qidg Qidg::build(const Program& program, const FabricConfig& config,
                 const OpcodeRegistry& registry) {
    Qidg g;
    g.qubits_ = program.qubits;
    g.accessors_.resize(program.qubits.size());

    for (const RawInstruction& ins : program.instructions) {
        const OpcodeInfo* op = registry.find(ins.opcode);
        if (!op) throw Error("UnknownOpcode", ins.opcode);
        QidgNode node;
        node.opcode = ins.opcode;
        node.two_qubit = op->duration == DurationClass::TwoQubit;
        node.duration_us = config.duration_us(node.two_qubit);
        for (const std::string& name : ins.operands) {
            auto q = program.qubit_index(name);
            if (!q) throw Error("UndeclaredQubit", name);
            node.operands.push_back(*q);
        }
        g.nodes_.push_back(std::move(node));
    }

    // Per-qubit adjacent-access edges: a read depends on the last write; a
    // write depends on every read since the last write (or on the last write
    // when there were none). Anything older is transitively implied.
    struct QubitState {
        int last_writer = -1;
        std::vector<int> readers_since; // pure reads after last_writer
    };
    std::vector<QubitState> state(g.qubits_.size());

    auto add_dep = [&](int from, int to, unsigned kind) {
        if (from == to) return;
        for (QidgEdge& e : g.edges_)
            if (e.from == from && e.to == to) {
                e.kinds |= kind;
                return;
            }
        g.edges_.push_back({from, to, kind});
        g.nodes_[to].parents.push_back(from);
        g.nodes_[from].children.push_back(to);
    };

    for (int i = 0; i < g.size(); ++i) {
        const QidgNode& node = g.nodes_[i];
        for (size_t pos = 0; pos < node.operands.size(); ++pos) {
            int q = node.operands[pos];
            Access acc = access_role(node, pos);
            QubitState& st = state[q];
            g.accessors_[q].push_back(i);

            if (acc.reads && st.last_writer >= 0 && !acc.writes)
                add_dep(st.last_writer, i, kDepRaw);
            if (acc.writes) {
                if (!st.readers_since.empty()) {
                    for (int reader : st.readers_since)
                        add_dep(reader, i, kDepWar);
                } else if (st.last_writer >= 0) {
                    add_dep(st.last_writer, i, kDepRaw | kDepWaw);
                }
                st.last_writer = i;
                st.readers_since.clear();
            }
            if (acc.reads && !acc.writes) st.readers_since.push_back(i);
        }
    }

    for (QidgNode& node : g.nodes_) {
        std::sort(node.parents.begin(), node.parents.end());
        std::sort(node.children.begin(), node.children.end());
    }
    g.levelize();
    return g;
}

bool Qidg::has_edge(int from, int to) const {
    return edge_kinds(from, to) != 0;
}

unsigned Qidg::edge_kinds(int from, int to) const {
    for (const QidgEdge& e : edges_)
        if (e.from == from && e.to == to) return e.kinds;
    return 0;
}

void Qidg::add_aux_edge(int from, int to) {
    if (reaches(to, from))
        throw Error("CycleDetected",
                    "aux edge " + std::to_string(from) + "->" +
                        std::to_string(to) + " would close a cycle");
    for (QidgEdge& e : edges_)
        if (e.from == from && e.to == to) {
            e.kinds |= kDepAux;
            return;
        }
    edges_.push_back({from, to, kDepAux});
    nodes_[to].parents.insert(
        std::lower_bound(nodes_[to].parents.begin(), nodes_[to].parents.end(), from),
        from);
    nodes_[from].children.insert(
        std::lower_bound(nodes_[from].children.begin(), nodes_[from].children.end(), to),
        to);
}

std::vector<int> Qidg::topological_order() const {
    std::vector<int> indegree(size()), order;
    order.reserve(size());
    for (int i = 0; i < size(); ++i)
        indegree[i] = static_cast<int>(nodes_[i].parents.size());
    std::deque<int> ready;
    for (int i = 0; i < size(); ++i)
        if (indegree[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        int n = ready.front();
        ready.pop_front();
        order.push_back(n);
        for (int c : nodes_[n].children)
            if (--indegree[c] == 0) ready.push_back(c);
    }
    if (static_cast<int>(order.size()) != size())
        throw Error("CycleDetected", "dependency graph has a cycle");
    return order;
}

void Qidg::levelize(int horizon_levels) {
    if (empty()) {
        critical_levels_ = 0;
        return;
    }
    std::vector<int> order = topological_order();

    for (int n : order) {
        int asap = 0;
        for (int p : nodes_[n].parents) asap = std::max(asap, nodes_[p].asap + 1);
        nodes_[n].asap = asap;
    }
    critical_levels_ = 0;
    for (const QidgNode& n : nodes_)
        critical_levels_ = std::max(critical_levels_, n.asap + 1);

    int bound = std::max(critical_levels_, horizon_levels);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int height = 0;
        for (int c : nodes_[*it].children)
            height = std::max(height, bound - 1 - nodes_[c].alap + 1);
        nodes_[*it].alap = bound - 1 - height;
    }
    for (QidgNode& n : nodes_) {
        int slack = n.alap - n.asap;
        n.mobility = slack == 0 ? kMobilitySaturation : 1.0 / slack;
    }
}

bool Qidg::reaches(int from, int to) const {
    if (from == to) return true;
    std::vector<char> seen(size(), 0);
    std::deque<int> q{from};
    seen[from] = 1;
    while (!q.empty()) {
        int n = q.front();
        q.pop_front();
        for (int c : nodes_[n].children) {
            if (c == to) return true;
            if (!seen[c]) seen[c] = 1, q.push_back(c);
        }
    }
    return false;
}

void Qidg::compute_sibling_sets() {
    for (QidgNode& n : nodes_) n.siblings.clear();
    if (empty()) return;

    // Reachability closure over bitsets; graphs here are instruction lists,
    // not algorithm-scale circuits, so the quadratic bound is fine.
    int words = (size() + 63) / 64;
    std::vector<std::uint64_t> reach(static_cast<size_t>(size()) * words, 0);
    std::vector<int> order = topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int n = *it;
        auto* row = &reach[static_cast<size_t>(n) * words];
        row[n / 64] |= 1ull << (n % 64);
        for (int c : nodes_[n].children) {
            const auto* crow = &reach[static_cast<size_t>(c) * words];
            for (int w = 0; w < words; ++w) row[w] |= crow[w];
        }
    }
    auto ordered = [&](int a, int b) {
        return (reach[static_cast<size_t>(a) * words + b / 64] >> (b % 64)) & 1u;
    };

    for (const std::vector<int>& chain : accessors_) {
        for (size_t x = 0; x < chain.size(); ++x) {
            for (size_t y = x + 1; y < chain.size(); ++y) {
                int a = chain[x], b = chain[y];
                if (a == b || ordered(a, b) || ordered(b, a)) continue;
                nodes_[a].siblings.push_back(b);
                nodes_[b].siblings.push_back(a);
            }
        }
    }
    for (QidgNode& n : nodes_) {
        std::sort(n.siblings.begin(), n.siblings.end());
        n.siblings.erase(std::unique(n.siblings.begin(), n.siblings.end()),
                         n.siblings.end());
    }
}

void Qidg::dump_dot(std::ostream& out) const {
    out << "digraph qidg {\n";
    for (int i = 0; i < size(); ++i) {
        out << "  n" << i + 1 << " [label=\"" << i + 1 << ": " << nodes_[i].opcode;
        for (size_t k = 0; k < nodes_[i].operands.size(); ++k)
            out << (k == 0 ? " " : ", ") << qubits_[nodes_[i].operands[k]].name;
        out << "\\nasap=" << nodes_[i].asap << " alap=" << nodes_[i].alap
            << "\"];\n";
    }
    std::vector<QidgEdge> sorted = edges_;
    std::sort(sorted.begin(), sorted.end(), [](const QidgEdge& a, const QidgEdge& b) {
        return std::tie(a.from, a.to) < std::tie(b.from, b.to);
    });
    for (const QidgEdge& e : sorted) {
        out << "  n" << e.from + 1 << " -> n" << e.to + 1 << " [label=\"";
        const char* sep = "";
        if (e.kinds & kDepRaw) out << sep << "RAW", sep = "|";
        if (e.kinds & kDepWaw) out << sep << "WAW", sep = "|";
        if (e.kinds & kDepWar) out << sep << "WAR", sep = "|";
        if (e.kinds & kDepAux) out << sep << "AUX", sep = "|";
        out << "\"";
        if (e.kinds == kDepAux) out << " style=dashed";
        out << "];\n";
    }
    out << "}\n";
}

} // namespace ionmap
