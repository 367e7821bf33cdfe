#pragma once

#include <stdexcept>
#include <string>

namespace qrmsim {

enum class ErrorCode {
    invalid_argument = 1,
    config = 2,
    regime = 3,
    truncation = 4,
    io = 5,
    internal = 6,
};

// Base of every exception thrown by the library. The C API maps code() onto
// its integer status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool ok, const std::string& what, ErrorCode code = ErrorCode::invalid_argument) {
    if (!ok) throw Error(code, what);
}

}  // namespace qrmsim
