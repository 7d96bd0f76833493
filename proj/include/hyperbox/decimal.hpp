#ifndef HYPERBOX_DECIMAL_HPP
#define HYPERBOX_DECIMAL_HPP

// Exact conversions between binary64 values and decimal text.
//
// Every finite double has a finite decimal expansion. format_exact() prints
// that expansion in full so a reader recovers the identical bits, and
// compare_decimal() orders an arbitrary decimal literal against a double
// without rounding, which is what outward-rounded parsing needs.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>

#include "hyperbox/errors.hpp"

namespace hyperbox::decimal {

// value = (negative ? -1 : 1) * 0.d1 d2 d3 ... * 10^point
// digits carries no leading or trailing zeros; empty digits means zero.
struct Normalized {
    bool negative = false;
    std::string digits;
    long point = 0;
};

inline bool is_zero(const Normalized& n) { return n.digits.empty(); }

// Parses [+-]?digits[.digits]?([eE][+-]?digits)? into normalized form.
inline Normalized normalize(std::string_view text) {
    Normalized out;
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        out.negative = text[pos] == '-';
        ++pos;
    }
    std::string raw;
    long int_digits = 0;
    bool seen_dot = false;
    bool any_digit = false;
    for (; pos < text.size(); ++pos) {
        const char ch = text[pos];
        if (ch >= '0' && ch <= '9') {
            raw.push_back(ch);
            any_digit = true;
            if (!seen_dot) ++int_digits;
        } else if (ch == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!any_digit) throw ParseError("not a decimal number: '" + std::string(text) + "'");
    long exponent = 0;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        const char* first = text.data() + pos;
        const char* last = text.data() + text.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, exponent);
        if (ec != std::errc() || ptr != last) throw ParseError("bad exponent in '" + std::string(text) + "'");
        pos = text.size();
    }
    if (pos != text.size()) throw ParseError("trailing characters in '" + std::string(text) + "'");

    const auto first_nz = raw.find_first_not_of('0');
    if (first_nz == std::string::npos) {
        out.negative = false;
        return out;
    }
    const auto last_nz = raw.find_last_not_of('0');
    out.digits = raw.substr(first_nz, last_nz - first_nz + 1);
    out.point = int_digits - static_cast<long>(first_nz) + exponent;
    return out;
}

inline std::strong_ordering compare_magnitude(const Normalized& a, const Normalized& b) {
    if (is_zero(a) || is_zero(b)) return is_zero(b) <=> is_zero(a);
    if (a.point != b.point) return a.point <=> b.point;
    const auto n = std::max(a.digits.size(), b.digits.size());
    for (std::size_t k = 0; k < n; ++k) {
        const char da = k < a.digits.size() ? a.digits[k] : '0';
        const char db = k < b.digits.size() ? b.digits[k] : '0';
        if (da != db) return da <=> db;
    }
    return std::strong_ordering::equal;
}

inline std::strong_ordering compare(const Normalized& a, const Normalized& b) {
    const bool za = is_zero(a);
    const bool zb = is_zero(b);
    if (za && zb) return std::strong_ordering::equal;
    const int sa = za ? 0 : (a.negative ? -1 : 1);
    const int sb = zb ? 0 : (b.negative ? -1 : 1);
    if (sa != sb) return sa <=> sb;
    const auto mag = compare_magnitude(a, b);
    return sa > 0 ? mag : 0 <=> mag;
}

// Full decimal expansion of a finite double: digits and decimal exponent.
inline Normalized expand(double x) {
    if (!std::isfinite(x)) throw DomainError("cannot expand a non-finite value");
    // 767 significant digits cover the longest expansion (subnormals).
    char buf[900];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 767);
    if (ec != std::errc()) throw DomainError("to_chars failed");
    return normalize(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

// Exact decimal rendering of a finite double. Plain positional notation for
// moderate magnitudes, scientific otherwise. Parsing the result with
// std::from_chars or hull() returns exactly x.
inline std::string format_exact(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    const Normalized n = expand(x);
    if (is_zero(n)) return std::signbit(x) ? "-0" : "0";
    std::string out = n.negative ? "-" : "";
    const long len = static_cast<long>(n.digits.size());
    if (n.point > 0 && n.point <= 20) {
        if (len <= n.point) {
            out += n.digits;
            out.append(static_cast<std::size_t>(n.point - len), '0');
        } else {
            out += n.digits.substr(0, static_cast<std::size_t>(n.point));
            out += '.';
            out += n.digits.substr(static_cast<std::size_t>(n.point));
        }
    } else if (n.point <= 0 && n.point > -6) {
        out += "0.";
        out.append(static_cast<std::size_t>(-n.point), '0');
        out += n.digits;
    } else {
        out += n.digits.substr(0, 1);
        if (len > 1) {
            out += '.';
            out += n.digits.substr(1);
        }
        out += 'e';
        out += std::to_string(n.point - 1);
    }
    return out;
}

// Round-to-nearest parse plus the exact ordering of the literal against the
// returned double. ordering is `greater` when the literal exceeds the double.
struct NearestParse {
    double value;
    std::strong_ordering literal_vs_value;
};

inline NearestParse parse_nearest(std::string_view text) {
    const Normalized n = normalize(text);
    if (is_zero(n)) return {0.0, std::strong_ordering::equal};
    std::string_view body = text;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), x);
    if (ec == std::errc::result_out_of_range) {
        const double big = std::numeric_limits<double>::max();
        const double tiny = std::numeric_limits<double>::denorm_min();
        if (n.point > 0) {
            x = n.negative ? -big : big;
        } else {
            x = n.negative ? -tiny : tiny;
        }
        // Clamped magnitudes lie strictly inside the literal's direction.
        const bool literal_larger_mag = n.point > 0;
        const bool greater = literal_larger_mag != n.negative;
        return {x, greater ? std::strong_ordering::greater : std::strong_ordering::less};
    }
    if (ec != std::errc() || ptr != body.data() + body.size()) {
        throw ParseError("not a decimal number: '" + std::string(text) + "'");
    }
    return {x, compare(n, expand(x))};
}

} // namespace hyperbox::decimal

#endif
