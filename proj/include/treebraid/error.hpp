#pragma once

#include <stdexcept>
#include <string>

namespace treebraid {

/// Failure categories; the CLI maps them onto its exit codes.
enum class ErrorKind {
    Invalid = 1,
    Hypothesis = 2,
    Budget = 3,
    Parse = 4,
    Unsupported = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what)
{
    if (!cond)
        fail(kind, what);
}

} // namespace treebraid
