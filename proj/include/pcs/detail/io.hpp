#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace pcs::detail {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec == std::errc{}) return std::string(buf, res.ptr);
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace pcs::detail
