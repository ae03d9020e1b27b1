#ifndef IONMAP_TEST_HELPERS_HPP
#define IONMAP_TEST_HELPERS_HPP

#include <cassert>
#include <cmath>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "ionmap/fabric.hpp"
#include "ionmap/placer.hpp"
#include "ionmap/qasm.hpp"
#include "ionmap/qidg.hpp"

namespace ionmap::test {

// Fig-style logical-zero preparation circuit, control operand first.
inline const char* steane_zero_qasm() {
    return "QUBIT q0, 0\nQUBIT q1, 0\nQUBIT q2, 0\nQUBIT q3, 0\n"
           "QUBIT q4, 0\nQUBIT q5, 0\nQUBIT q6, 0\n"
           "H q0\nH q1\nH q3\n"
           "CNOT q0, q2\nCNOT q3, q5\nCNOT q1, q6\nCNOT q0, q4\n"
           "CNOT q3, q6\nCNOT q1, q5\nCNOT q0, q6\nCNOT q1, q2\nCNOT q3, q4\n";
}

// The same program as printed in the reference listing (operands reversed);
// exercises the parser's literal behavior.
inline const char* steane_zero_listing_qasm() {
    return "QUBIT q0, 0\nQUBIT q1, 0\nQUBIT q2, 0\nQUBIT q3, 0\n"
           "QUBIT q4, 0\nQUBIT q5, 0\nQUBIT q6, 0\n"
           "H q0\nH q1\nH q3\n"
           "CNOT q2, q0\nCNOT q5, q3\nCNOT q6, q1\nCNOT q4, q0\n"
           "CNOT q6, q3\nCNOT q5, q1\nCNOT q6, q0\nCNOT q2, q1\nCNOT q4, q3\n";
}

/// Random circuit over `qubits` ancillas with mixed H/CNOT instructions;
/// drives random dependency and sibling structure.
inline Program random_circuit(std::mt19937_64& rng, int qubits, int instructions) {
    Program prog;
    for (int q = 0; q < qubits; ++q)
        prog.qubits.push_back({"q" + std::to_string(q), InitialState::Zero,
                               QubitKind::Ancilla});
    std::uniform_int_distribution<int> qdist(0, qubits - 1);
    std::uniform_int_distribution<int> kind(0, 2); // 2/3 CNOT
    for (int i = 0; i < instructions; ++i) {
        RawInstruction ins;
        ins.index = i + 1;
        if (qubits >= 2 && kind(rng) != 0) {
            int a = qdist(rng), b = qdist(rng);
            while (b == a) b = qdist(rng);
            ins.opcode = "CNOT";
            ins.operands = {prog.qubits[a].name, prog.qubits[b].name};
        } else {
            ins.opcode = "H";
            ins.operands = {prog.qubits[qdist(rng)].name};
        }
        prog.instructions.push_back(std::move(ins));
    }
    return prog;
}

/// Breadth-first distances recomputed from the adjacency alone; the oracle
/// for Fabric::physical_distance.
inline std::vector<int> bfs_oracle(const Fabric& fabric, WellId source) {
    std::vector<int> dist(fabric.well_count(), -1);
    std::deque<WellId> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        WellId w = queue.front();
        queue.pop_front();
        for (WellId n : fabric.neighbors(w))
            if (dist[n] < 0) {
                dist[n] = dist[w] + 1;
                queue.push_back(n);
            }
    }
    return dist;
}

/// Dense normal-equation solve by Gaussian elimination with partial
/// pivoting; independent of the conjugate-gradient path it checks.
inline std::vector<double> dense_solve(const QuadraticSystem& sys) {
    int n = sys.free_count;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (auto [i, j, w] : sys.nets) {
        a[i][i] += w;
        a[j][j] += w;
        a[i][j] -= w;
        a[j][i] -= w;
    }
    for (auto [i, pos, w] : sys.anchors) {
        a[i][i] += w;
        b[i] += w * pos;
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        assert(std::abs(a[col][col]) > 1e-12);
        for (int r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

/// Minimum-cost perfect matching on a rows x cols cost matrix (rows <=
/// cols), O(rows^2 cols) Hungarian algorithm. Oracle for the greedy well
/// assignment bound.
inline double hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    int m = static_cast<int>(cost[0].size());
    assert(n <= m);
    const double inf = 1e18;
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= m; ++j)
        if (p[j] > 0) total += cost[p[j] - 1][j - 1];
    return total;
}

} // namespace ionmap::test

#endif
