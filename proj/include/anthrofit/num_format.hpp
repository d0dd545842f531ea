#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace anthrofit {

// Shortest representation that round-trips the exact double.
inline std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string format_double(double value, int significant_digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general,
                             significant_digits);
    return std::string(buf, res.ptr);
}

inline bool parse_double(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (first != last && is_space(*first)) ++first;
    while (last != first && is_space(*(last - 1))) --last;
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && first != last;
}

} // namespace anthrofit
