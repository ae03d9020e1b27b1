#ifndef IONMAP_QASM_HPP
#define IONMAP_QASM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ionmap/error.hpp"

namespace ionmap {

enum class InitialState { Zero, One, Plus, Minus };
enum class QubitKind { IO, Ancilla };
enum class DurationClass { OneQubit, TwoQubit };

struct QubitDecl {
    std::string name;
    InitialState initial_state = InitialState::Zero;
    QubitKind kind = QubitKind::Ancilla;
};

/// One statement of the instruction section, in file order. `index` is the
/// 1-based position among instruction lines; for two-operand opcodes the
/// first operand is the control qubit and the second the target.
struct RawInstruction {
    int index = 0;
    std::string opcode;
    std::vector<std::string> operands;
};

struct OpcodeInfo {
    std::string name;
    int arity = 1;
    DurationClass duration = DurationClass::OneQubit;
};

/// Open vocabulary of accepted opcodes. Unknown names are parse errors, they
/// never pass through.
class OpcodeRegistry {
public:
    /// H, X, Y, Z, S, Sdag, T, Tdag (one-qubit) plus CNOT, CZ (two-qubit).
    static const OpcodeRegistry& standard();

    void add(OpcodeInfo info);
    const OpcodeInfo* find(std::string_view name) const;

private:
    std::map<std::string, OpcodeInfo, std::less<>> ops_;
};

struct Program {
    std::vector<QubitDecl> qubits;
    std::vector<RawInstruction> instructions;

    /// Declaration-order index, or nullopt for undeclared names.
    std::optional<int> qubit_index(std::string_view name) const;
};

/// Parses the line-oriented QASM subset:
///
///   QUBIT <name>, <0|1|+|-> [io]
///   <OPCODE> <q>[, <q>]
///
/// Blank lines and `#` comments are permitted; operands are separated by
/// commas and/or spaces; declarations must precede instructions. Errors
/// (UnknownOpcode, UndeclaredQubit, ArityMismatch, DuplicateQubit, ...)
/// report the offending line number.
Program parse_qasm(std::string_view text,
                   const OpcodeRegistry& registry = OpcodeRegistry::standard());

/// Canonical serialization; parse_qasm(to_qasm(p)) reproduces p exactly.
std::string to_qasm(const Program& program);

} // namespace ionmap

#endif
