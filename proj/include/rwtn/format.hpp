#pragma once

#include <charconv>
#include <string>

namespace rwtn {

/// Shortest round-trip decimal form; byte-stable for reproducible CSV output.
inline std::string fmt_double(double x) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

}  // namespace rwtn
