#ifndef IMPGEN_ERROR_HPP
#define IMPGEN_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impgen {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Failure talking to a decision procedure (spawn, I/O, protocol).
class BackendError : public Error {
public:
    using Error::Error;
};

} // namespace impgen

#endif // IMPGEN_ERROR_HPP
