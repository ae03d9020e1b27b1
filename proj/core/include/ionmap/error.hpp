#ifndef IONMAP_ERROR_HPP
#define IONMAP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ionmap {

/// All domain failures carry a stable machine-readable code ("UnknownOpcode",
/// "Deadlock", ...) next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

} // namespace ionmap

#endif
