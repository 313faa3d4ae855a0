#ifndef NIDS_SRC_TEXT_IO_HPP
#define NIDS_SRC_TEXT_IO_HPP

// Whitespace-token helpers for the text model formats.

#include "nids/error.hpp"

#include <charconv>
#include <istream>
#include <string>

namespace nids::detail {

/// Shortest representation that reads back to the same double.
inline std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

inline double parse_double(const std::string& token, const std::string& context) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError(0, context + ": bad number '" + token + "'");
    }
    return value;
}

template <typename T>
T read_value(std::istream& in, const std::string& context, const char* what) {
    T value{};
    if (!(in >> value)) {
        throw ParseError(0, context + ": expected " + what);
    }
    return value;
}

inline double read_double(std::istream& in, const std::string& context, const char* what) {
    return parse_double(read_value<std::string>(in, context, what), context);
}

inline void expect_word(std::istream& in, const std::string& context, const std::string& word) {
    std::string token;
    if (!(in >> token) || token != word) {
        throw ParseError(0, context + ": expected '" + word + "', found '" + token + "'");
    }
}

} // namespace nids::detail

#endif // NIDS_SRC_TEXT_IO_HPP
