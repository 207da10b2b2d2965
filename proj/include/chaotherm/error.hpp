#pragma once

#include <stdexcept>
#include <string>

namespace chaotherm {

enum class ErrorKind {
    empty_spectrum,
    parameter,
    range,
    ordering,
    insufficient_data,
    degenerate_input,
    shape,
    numeric,
    config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
    if (!ok) fail(kind, what);
}

}  // namespace chaotherm
