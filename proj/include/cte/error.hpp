#pragma once

#include <stdexcept>
#include <string>

namespace cte {

/// Error categories surfaced to callers; the CLI maps Parse/Io/Usage to
/// exit code 2 and everything else to exit code 1.
enum class ErrorKind {
    Parse,
    Domain,
    Dimension,
    Numeric,
    Size,
    Io,
    Usage,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_parse(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }
[[noreturn]] inline void throw_domain(const std::string& msg) { throw Error(ErrorKind::Domain, msg); }
[[noreturn]] inline void throw_dimension(const std::string& msg) { throw Error(ErrorKind::Dimension, msg); }
[[noreturn]] inline void throw_numeric(const std::string& msg) { throw Error(ErrorKind::Numeric, msg); }
[[noreturn]] inline void throw_size(const std::string& msg) { throw Error(ErrorKind::Size, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::Io, msg); }

}  // namespace cte
