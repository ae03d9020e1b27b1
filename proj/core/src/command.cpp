#include "ionmap/command.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace ionmap {

void CommandStream::sort() {
    std::stable_sort(commands.begin(), commands.end(),
                     [](const Command& a, const Command& b) {
                         int ida = a.kind == CommandKind::Operate ? a.instr : a.qubit;
                         int idb = b.kind == CommandKind::Operate ? b.instr : b.qubit;
                         return std::tuple(a.time_us, static_cast<int>(a.kind), ida) <
                                std::tuple(b.time_us, static_cast<int>(b.kind), idb);
                     });
}

namespace {

void write_pos(std::ostream& out, const Fabric& fabric, WellId w) {
    const WellInfo& info = fabric.well(w);
    out << '(' << info.row << ',' << info.col << ')';
}

WellId parse_pos(const std::string& token, const Fabric& fabric, int line) {
    int r = 0, c = 0;
    char open = 0, comma = 0, close = 0;
    std::istringstream in(token);
    in >> open >> r >> comma >> c >> close;
    if (!in || open != '(' || comma != ',' || close != ')')
        throw Error("MalformedStream",
                    "line " + std::to_string(line) + ": bad position '" + token + "'");
    WellId w = fabric.well_at(r, c);
    if (w < 0)
        throw Error("UnknownWell", "line " + std::to_string(line) + ": no well at " +
                                       token);
    return w;
}

int parse_tagged(const std::string& token, char tag, int line) {
    if (token.size() < 2 || token[0] != tag)
        throw Error("MalformedStream", "line " + std::to_string(line) +
                                           ": expected " + tag + "<index>, got '" +
                                           token + "'");
    return std::stoi(token.substr(1));
}

} // namespace

void write_stream(std::ostream& out, const CommandStream& stream,
                  const Fabric& fabric) {
    out << "# command stream: " << stream.commands.size()
        << " commands, total latency " << stream.total_latency_us << " us\n";
    for (const Command& cmd : stream.commands) {
        out << cmd.time_us << ' ';
        switch (cmd.kind) {
            case CommandKind::Create:
                out << "CREATE q" << cmd.qubit << ' ';
                write_pos(out, fabric, cmd.to);
                break;
            case CommandKind::Move:
                out << "MOVE q" << cmd.qubit << ' ';
                write_pos(out, fabric, cmd.from);
                out << "->";
                write_pos(out, fabric, cmd.to);
                break;
            case CommandKind::Operate:
                out << "OP " << cmd.opcode << " I" << cmd.instr << ' ';
                write_pos(out, fabric, cmd.to);
                for (int q : cmd.operands) out << " q" << q;
                break;
        }
        out << '\n';
    }
}

CommandStream read_stream(std::istream& in, const Fabric& fabric) {
    CommandStream stream;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Command cmd;
        std::string verb;
        ls >> cmd.time_us >> verb;
        if (!ls)
            throw Error("MalformedStream", "line " + std::to_string(line_no));
        if (verb == "CREATE") {
            cmd.kind = CommandKind::Create;
            std::string q, pos;
            ls >> q >> pos;
            cmd.qubit = parse_tagged(q, 'q', line_no);
            cmd.to = parse_pos(pos, fabric, line_no);
        } else if (verb == "MOVE") {
            cmd.kind = CommandKind::Move;
            std::string q, hop;
            ls >> q >> hop;
            cmd.qubit = parse_tagged(q, 'q', line_no);
            size_t arrow = hop.find("->");
            if (arrow == std::string::npos)
                throw Error("MalformedStream",
                            "line " + std::to_string(line_no) + ": bad hop");
            cmd.from = parse_pos(hop.substr(0, arrow), fabric, line_no);
            cmd.to = parse_pos(hop.substr(arrow + 2), fabric, line_no);
        } else if (verb == "OP") {
            cmd.kind = CommandKind::Operate;
            std::string instr, pos;
            ls >> cmd.opcode >> instr >> pos;
            cmd.instr = parse_tagged(instr, 'I', line_no);
            cmd.to = parse_pos(pos, fabric, line_no);
            std::string q;
            while (ls >> q) cmd.operands.push_back(parse_tagged(q, 'q', line_no));
        } else {
            throw Error("MalformedStream", "line " + std::to_string(line_no) +
                                               ": unknown verb '" + verb + "'");
        }
        stream.commands.push_back(std::move(cmd));
        stream.total_latency_us = std::max(stream.total_latency_us, stream.commands.back().time_us);
    }
    return stream;
}

} // namespace ionmap
