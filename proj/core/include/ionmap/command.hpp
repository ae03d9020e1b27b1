#ifndef IONMAP_COMMAND_HPP
#define IONMAP_COMMAND_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ionmap/fabric.hpp"

namespace ionmap {

enum class CommandKind { Create = 0, Move = 1, Operate = 2 };

/// One low-level control command. Wells are stored as ids; the text format
/// uses (row,col) positions. `instr` is the 1-based instruction index for
/// Operate, `qubit` the declaration-order qubit index for Create/Move.
struct Command {
    CommandKind kind = CommandKind::Move;
    std::int64_t time_us = 0;
    int qubit = -1;
    int instr = -1;
    WellId from = -1;
    WellId to = -1;
    std::string opcode;
    std::vector<int> operands;
};

struct CommandStream {
    std::vector<Command> commands;
    std::int64_t total_latency_us = 0;

    /// Stable order (time, kind, id).
    void sort();
};

/// Line format, one command per line:
///   <time_us> CREATE q<i> (<r>,<c>)
///   <time_us> MOVE q<i> (<r>,<c>)->(<r>,<c>)
///   <time_us> OP <opcode> I<k> (<r>,<c>) [q...]
void write_stream(std::ostream& out, const CommandStream& stream,
                  const Fabric& fabric);

/// Inverse of write_stream; `#` comment lines and blank lines are skipped.
/// Throws MalformedStream on syntax errors and UnknownWell for positions
/// that name no well on this fabric.
CommandStream read_stream(std::istream& in, const Fabric& fabric);

} // namespace ionmap

#endif
