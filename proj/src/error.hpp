#pragma once

#include <stdexcept>
#include <string>

namespace ecco {

// Error categories; values mirror the ecco_status codes of the public C API.
enum class ErrorCode : int {
    invalid_argument = 1,
    io               = 2,
    format           = 3,
    overflow         = 4,
    internal         = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace ecco
