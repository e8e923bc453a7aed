#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>

namespace perfmodel::detail {

// Shortest decimal form that parses back to the same double, so text
// round-trips are bit-exact.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Strict full-field parse; rejects trailing garbage, empty fields, inf/nan
// spellings are accepted only if from_chars does (it does not by default
// format here, which is fine: data files carry finite decimals).
inline std::optional<double> parse_double(std::string_view field) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        return std::nullopt;
    }
    return v;
}

} // namespace perfmodel::detail
