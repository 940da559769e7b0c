#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "shapebands/errors.hpp"

namespace shapebands {

// Prints a double with the given number of significant digits.
// Infinities become "inf"/"-inf" so they survive a CSV round trip.
inline std::string format_significant(double value, int digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
    return buf;
}

// Inverse of format_significant; accepts ordinary numeric literals too.
inline double parse_band_value(const std::string& field) {
    if (field == "inf") return std::numeric_limits<double>::infinity();
    if (field == "-inf") return -std::numeric_limits<double>::infinity();
    if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + field + "'");
    }
    while (pos < field.size() && (field[pos] == ' ' || field[pos] == '\t' || field[pos] == '\r')) ++pos;
    if (pos != field.size()) throw ParseError("trailing characters in number: '" + field + "'");
    return v;
}

}  // namespace shapebands
