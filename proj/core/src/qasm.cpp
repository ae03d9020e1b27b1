#include "ionmap/qasm.hpp"

#include <algorithm>
#include <sstream>

namespace ionmap {
namespace {

Error parse_error(const std::string& code, int line, const std::string& what) {
    return Error(code, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::optional<InitialState> parse_state(std::string_view s) {
    if (s == "0") return InitialState::Zero;
    if (s == "1") return InitialState::One;
    if (s == "+") return InitialState::Plus;
    if (s == "-") return InitialState::Minus;
    return std::nullopt;
}

char state_char(InitialState s) {
    switch (s) {
        case InitialState::Zero: return '0';
        case InitialState::One: return '1';
        case InitialState::Plus: return '+';
        case InitialState::Minus: return '-';
    }
    return '0';
}

} // namespace

const OpcodeRegistry& OpcodeRegistry::standard() {
    static const OpcodeRegistry reg = [] {
        OpcodeRegistry r;
        for (const char* name : {"H", "X", "Y", "Z", "S", "Sdag", "T", "Tdag"})
            r.add({name, 1, DurationClass::OneQubit});
        for (const char* name : {"CNOT", "CZ"})
            r.add({name, 2, DurationClass::TwoQubit});
        return r;
    }();
    return reg;
}

void OpcodeRegistry::add(OpcodeInfo info) {
    ops_.insert_or_assign(info.name, std::move(info));
}

const OpcodeInfo* OpcodeRegistry::find(std::string_view name) const {
    auto it = ops_.find(name);
    return it == ops_.end() ? nullptr : &it->second;
}

std::optional<int> Program::qubit_index(std::string_view name) const {
    for (size_t i = 0; i < qubits.size(); ++i)
        if (qubits[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

Program parse_qasm(std::string_view text, const OpcodeRegistry& registry) {
    Program prog;
    bool in_instructions = false;
    int line_no = 0;

    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos
                                                     ? text.size() - pos
                                                     : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);

        std::vector<std::string> fields = split_fields(line);
        if (fields.empty()) continue;

        if (fields[0] == "QUBIT") {
            if (in_instructions)
                throw parse_error("DeclarationAfterInstruction", line_no,
                                  "qubit declared after first instruction");
            if (fields.size() < 3 || fields.size() > 4)
                throw parse_error("MalformedDeclaration", line_no,
                                  "expected QUBIT <name>, <0|1|+|-> [io]");
            QubitDecl decl;
            decl.name = fields[1];
            auto st = parse_state(fields[2]);
            if (!st)
                throw parse_error("MalformedDeclaration", line_no,
                                  "bad initial state '" + fields[2] + "'");
            decl.initial_state = *st;
            if (fields.size() == 4) {
                if (fields[3] != "io")
                    throw parse_error("MalformedDeclaration", line_no,
                                      "unknown declaration flag '" + fields[3] + "'");
                decl.kind = QubitKind::IO;
            }
            if (prog.qubit_index(decl.name))
                throw parse_error("DuplicateQubit", line_no,
                                  "qubit '" + decl.name + "' already declared");
            prog.qubits.push_back(std::move(decl));
            continue;
        }

        in_instructions = true;
        const OpcodeInfo* op = registry.find(fields[0]);
        if (!op)
            throw parse_error("UnknownOpcode", line_no,
                              "opcode '" + fields[0] + "' not registered");
        RawInstruction instr;
        instr.index = static_cast<int>(prog.instructions.size()) + 1;
        instr.opcode = op->name;
        for (size_t i = 1; i < fields.size(); ++i) {
            if (!prog.qubit_index(fields[i]))
                throw parse_error("UndeclaredQubit", line_no,
                                  "qubit '" + fields[i] + "' not declared");
            instr.operands.push_back(fields[i]);
        }
        if (static_cast<int>(instr.operands.size()) != op->arity)
            throw parse_error("ArityMismatch", line_no,
                              op->name + " takes " + std::to_string(op->arity) +
                                  " operand(s), got " +
                                  std::to_string(instr.operands.size()));
        prog.instructions.push_back(std::move(instr));
    }
    return prog;
}

std::string to_qasm(const Program& program) {
    std::ostringstream out;
    for (const QubitDecl& q : program.qubits) {
        out << "QUBIT " << q.name << ", " << state_char(q.initial_state);
        if (q.kind == QubitKind::IO) out << " io";
        out << '\n';
    }
    for (const RawInstruction& ins : program.instructions) {
        out << ins.opcode;
        for (size_t i = 0; i < ins.operands.size(); ++i)
            out << (i == 0 ? " " : ", ") << ins.operands[i];
        out << '\n';
    }
    return out.str();
}

} // namespace ionmap
