#ifndef IONMAP_BENCH_COMMON_HPP
#define IONMAP_BENCH_COMMON_HPP

#include <random>
#include <string>

#include "ionmap/qasm.hpp"

namespace ionmap::bench {

/// Layered random circuit: `width` qubits, `layers` rounds of mixed H/CNOT.
inline Program layered_circuit(int width, int layers, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Program prog;
    for (int q = 0; q < width; ++q)
        prog.qubits.push_back({"q" + std::to_string(q), InitialState::Zero,
                               QubitKind::Ancilla});
    std::uniform_int_distribution<int> pick(0, width - 1);
    int index = 1;
    for (int layer = 0; layer < layers; ++layer) {
        for (int k = 0; k + 1 < width; k += 2) {
            RawInstruction ins;
            ins.index = index++;
            if ((layer + k) % 3 == 0) {
                ins.opcode = "H";
                ins.operands = {prog.qubits[pick(rng)].name};
            } else {
                int a = pick(rng), b = pick(rng);
                while (b == a) b = pick(rng);
                ins.opcode = "CNOT";
                ins.operands = {prog.qubits[a].name, prog.qubits[b].name};
            }
            prog.instructions.push_back(std::move(ins));
        }
    }
    return prog;
}

} // namespace ionmap::bench

#endif
