#ifndef NIDS_ERROR_HPP
#define NIDS_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nids {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input line. line() is 1-based; 0 means the whole input.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_{line} {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownLabelError : public Error {
public:
    explicit UnknownLabelError(std::string label)
        : Error("unknown label '" + label + "'"), label_{std::move(label)} {}

    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace nids

#endif // NIDS_ERROR_HPP
