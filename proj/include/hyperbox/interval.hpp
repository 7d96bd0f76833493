#ifndef HYPERBOX_INTERVAL_HPP
#define HYPERBOX_INTERVAL_HPP

// Closed intervals over binary64 with outward rounding, and axis-aligned
// complex boxes built on them.
//
// Rounding is done without touching the FPU mode: each operation is
// evaluated to nearest, the exact rounding error is recovered with an
// error-free transformation (TwoSum / fma residual), and the endpoint is
// stepped one ulp outward only when the nearest result is on the wrong
// side. Results are therefore the tightest machine enclosure in the normal
// range. Near the underflow threshold the residual may itself be inexact,
// so there the endpoint is stepped unconditionally.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "hyperbox/decimal.hpp"
#include "hyperbox/errors.hpp"

namespace hyperbox {

namespace rounding {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMax = std::numeric_limits<double>::max();
// Below this magnitude an fma residual can underflow.
inline constexpr double kResidualFloor = 0x1p-960;

inline double next_up(double x) { return std::nextafter(x, kInf); }
inline double next_down(double x) { return std::nextafter(x, -kInf); }

// Sign of (exact a+b) - fl(a+b).
inline double two_sum_error(double a, double b, double s) {
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

inline double add_down(double a, double b) {
    const double s = a + b;
    if (std::isinf(s)) return (s > 0 && std::isfinite(a) && std::isfinite(b)) ? kMax : s;
    return two_sum_error(a, b, s) < 0 ? next_down(s) : s;
}

inline double add_up(double a, double b) {
    const double s = a + b;
    if (std::isinf(s)) return (s < 0 && std::isfinite(a) && std::isfinite(b)) ? -kMax : s;
    return two_sum_error(a, b, s) > 0 ? next_up(s) : s;
}

inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

// In set terms 0 * (unbounded) contributes 0, never NaN.
inline double mul_down(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (std::isinf(p)) return (p > 0 && std::isfinite(a) && std::isfinite(b)) ? kMax : p;
    if (std::fabs(p) < kResidualFloor) return next_down(p);
    return std::fma(a, b, -p) < 0 ? next_down(p) : p;
}

inline double mul_up(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (std::isinf(p)) return (p < 0 && std::isfinite(a) && std::isfinite(b)) ? -kMax : p;
    if (std::fabs(p) < kResidualFloor) return next_up(p);
    return std::fma(a, b, -p) > 0 ? next_up(p) : p;
}

namespace detail {
// +1 if exact a/b > q, -1 if below, 0 if equal; 2 if unknown.
inline int div_residual_sign(double a, double b, double q) {
    if (std::fabs(q) < kResidualFloor || std::fabs(a) < kResidualFloor || std::fabs(b) < kResidualFloor ||
        std::fabs(b) > 0x1p960) {
        return 2;
    }
    const double r = std::fma(-q, b, a);
    if (r == 0.0) return 0;
    return ((r > 0) == (b > 0)) ? 1 : -1;
}
} // namespace detail

inline double div_down(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (std::isinf(q)) return (q > 0 && std::isfinite(a)) ? kMax : q;
    if (std::isinf(b)) return q >= 0 ? 0.0 : q;
    const int s = detail::div_residual_sign(a, b, q);
    return (s < 0 || s == 2) ? next_down(q) : q;
}

inline double div_up(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (std::isinf(q)) return (q < 0 && std::isfinite(a)) ? -kMax : q;
    if (std::isinf(b)) return q <= 0 ? 0.0 : q;
    const int s = detail::div_residual_sign(a, b, q);
    return (s > 0 || s == 2) ? next_up(q) : q;
}

inline double sqrt_down(double x) {
    if (x <= 0.0) return 0.0;
    const double s = std::sqrt(x);
    if (std::isinf(s)) return s;
    if (x < kResidualFloor) return next_down(s);
    return std::fma(-s, s, x) < 0 ? next_down(s) : s;
}

inline double sqrt_up(double x) {
    if (x <= 0.0) return 0.0;
    const double s = std::sqrt(x);
    if (std::isinf(s)) return s;
    if (x < kResidualFloor) return next_up(s);
    return std::fma(-s, s, x) > 0 ? next_up(s) : s;
}

} // namespace rounding

class Interval {
public:
    constexpr Interval() = default;

    Interval(double lo, double hi) : lo_(lo), hi_(hi) {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
            throw DomainError("invalid interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
    }

    static Interval point(double x) { return {x, x}; }
    static Interval entire() { return {-rounding::kInf, rounding::kInf}; }

    double lo() const { return lo_; }
    double hi() const { return hi_; }

    // Infinite endpoints are the overflow signal.
    bool bounded() const { return std::isfinite(lo_) && std::isfinite(hi_); }
    bool is_point() const { return lo_ == hi_; }
    bool contains(double x) const { return lo_ <= x && x <= hi_; }
    bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool contains_zero() const { return contains(0.0); }
    bool intersects(const Interval& o) const { return lo_ <= o.hi_ && o.lo_ <= hi_; }

    double width_up() const { return rounding::sub_up(hi_, lo_); }
    double mid() const { return lo_ == hi_ ? lo_ : lo_ / 2 + hi_ / 2; }

    // Smallest and largest absolute value over the interval.
    double mig() const { return contains_zero() ? 0.0 : std::min(std::fabs(lo_), std::fabs(hi_)); }
    double mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }

    Interval operator-() const { return {-hi_, -lo_}; }

    friend Interval operator+(const Interval& a, const Interval& b) {
        return {rounding::add_down(a.lo_, b.lo_), rounding::add_up(a.hi_, b.hi_)};
    }
    friend Interval operator-(const Interval& a, const Interval& b) {
        return {rounding::sub_down(a.lo_, b.hi_), rounding::sub_up(a.hi_, b.lo_)};
    }
    friend Interval operator*(const Interval& a, const Interval& b) {
        using namespace rounding;
        const double l1 = mul_down(a.lo_, b.lo_), l2 = mul_down(a.lo_, b.hi_);
        const double l3 = mul_down(a.hi_, b.lo_), l4 = mul_down(a.hi_, b.hi_);
        const double u1 = mul_up(a.lo_, b.lo_), u2 = mul_up(a.lo_, b.hi_);
        const double u3 = mul_up(a.hi_, b.lo_), u4 = mul_up(a.hi_, b.hi_);
        return {std::min({l1, l2, l3, l4}), std::max({u1, u2, u3, u4})};
    }
    friend Interval operator/(const Interval& a, const Interval& b) {
        if (b.contains_zero()) throw DivisionByIntervalContainingZero();
        using namespace rounding;
        const double l1 = div_down(a.lo_, b.lo_), l2 = div_down(a.lo_, b.hi_);
        const double l3 = div_down(a.hi_, b.lo_), l4 = div_down(a.hi_, b.hi_);
        const double u1 = div_up(a.lo_, b.lo_), u2 = div_up(a.lo_, b.hi_);
        const double u3 = div_up(a.hi_, b.lo_), u4 = div_up(a.hi_, b.hi_);
        return {std::min({l1, l2, l3, l4}), std::max({u1, u2, u3, u4})};
    }

    Interval& operator+=(const Interval& o) { return *this = *this + o; }
    Interval& operator-=(const Interval& o) { return *this = *this - o; }
    Interval& operator*=(const Interval& o) { return *this = *this * o; }

    friend bool operator==(const Interval&, const Interval&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Interval& x) {
        return os << '[' << decimal::format_exact(x.lo_) << ", " << decimal::format_exact(x.hi_) << ']';
    }

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

// {x^2 : x in a}; tighter than a*a when a straddles zero.
inline Interval sqr(const Interval& a) {
    using namespace rounding;
    const double m = a.mig();
    const double M = a.mag();
    return {mul_down(m, m), mul_up(M, M)};
}

inline Interval pow(const Interval& a, unsigned n) {
    Interval result = Interval::point(1.0);
    Interval base = a;
    bool first = true;
    while (n > 0) {
        if (n & 1u) {
            result = first ? base : result * base;
            first = false;
        }
        n >>= 1u;
        if (n > 0) base = sqr(base);
    }
    return result;
}

// Convex hull of two intervals.
inline Interval join(const Interval& a, const Interval& b) {
    return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

inline Interval inflate(const Interval& a, double r) {
    return {rounding::sub_down(a.lo(), r), rounding::add_up(a.hi(), r)};
}

// Smallest machine interval containing the decimal literal.
inline Interval hull(std::string_view decimal_text) {
    const auto parsed = decimal::parse_nearest(decimal_text);
    const double x = parsed.value;
    if (parsed.literal_vs_value == std::strong_ordering::equal) return Interval::point(x);
    if (parsed.literal_vs_value == std::strong_ordering::greater) return {x, rounding::next_up(x)};
    return {rounding::next_down(x), x};
}

// Smallest machine interval containing num/den.
inline Interval hull_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw DomainError("zero denominator");
    constexpr std::int64_t kExact = std::int64_t{1} << 53;
    if (num > kExact || num < -kExact || den > kExact || den < -kExact) {
        // Operands not representable: go through two outward roundings.
        const Interval n = hull(std::to_string(num));
        const Interval d = hull(std::to_string(den));
        return n / d;
    }
    const auto a = static_cast<double>(num);
    const auto b = static_cast<double>(den);
    return {rounding::div_down(a, b), rounding::div_up(a, b)};
}

// Largest convenient v with v^n <= a.lo(), computed by stepping down from
// the libm estimate until an upward-rounded power confirms the bound.
inline double nth_root_lower(const Interval& a, unsigned n) {
    if (n == 0) throw DomainError("root index must be positive");
    if (a.lo() < 0.0) throw DomainError("nth_root_lower of an interval with negative infimum");
    const double x = a.lo();
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return rounding::kMax;
    if (n == 1) return x;
    double v = std::pow(x, 1.0 / static_cast<double>(n));
    if (std::isinf(v)) v = rounding::kMax;
    while (v > 0.0 && pow(Interval::point(v), n).hi() > x) v = rounding::next_down(v);
    return v;
}

// Rectangle re x im in the complex plane.
struct ComplexBox {
    Interval re;
    Interval im;

    static ComplexBox point(double x, double y) { return {Interval::point(x), Interval::point(y)}; }
    static ComplexBox point(std::complex<double> z) { return point(z.real(), z.imag()); }

    bool bounded() const { return re.bounded() && im.bounded(); }
    bool contains(std::complex<double> z) const { return re.contains(z.real()) && im.contains(z.imag()); }
    bool contains(const ComplexBox& o) const { return re.contains(o.re) && im.contains(o.im); }
    bool intersects(const ComplexBox& o) const { return re.intersects(o.re) && im.intersects(o.im); }
    bool contains_zero() const { return re.contains_zero() && im.contains_zero(); }
    std::complex<double> mid() const { return {re.mid(), im.mid()}; }

    ComplexBox operator-() const { return {-re, -im}; }
    friend ComplexBox operator+(const ComplexBox& a, const ComplexBox& b) { return {a.re + b.re, a.im + b.im}; }
    friend ComplexBox operator-(const ComplexBox& a, const ComplexBox& b) { return {a.re - b.re, a.im - b.im}; }
    friend ComplexBox operator*(const ComplexBox& a, const ComplexBox& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ComplexBox operator*(const Interval& s, const ComplexBox& b) { return {s * b.re, s * b.im}; }

    friend bool operator==(const ComplexBox&, const ComplexBox&) = default;

    friend std::ostream& operator<<(std::ostream& os, const ComplexBox& b) {
        return os << b.re << " + i" << b.im;
    }
};

inline ComplexBox sqr(const ComplexBox& z) {
    const Interval two = Interval::point(2.0);
    return {sqr(z.re) - sqr(z.im), two * (z.re * z.im)};
}

inline ComplexBox pow(const ComplexBox& z, unsigned n) {
    ComplexBox result = ComplexBox::point(1.0, 0.0);
    ComplexBox base = z;
    bool first = true;
    while (n > 0) {
        if (n & 1u) {
            result = first ? base : result * base;
            first = false;
        }
        n >>= 1u;
        if (n > 0) base = sqr(base);
    }
    return result;
}

// Sup-norm neighbourhood of radius r.
inline ComplexBox inflate(const ComplexBox& z, double r) { return {inflate(z.re, r), inflate(z.im, r)}; }

// Euclidean |z| bounds over the box, rounded outward.
inline double modulus_lower(const ComplexBox& z) {
    using namespace rounding;
    const double x = z.re.mig();
    const double y = z.im.mig();
    return sqrt_down(add_down(mul_down(x, x), mul_down(y, y)));
}

inline double modulus_upper(const ComplexBox& z) {
    using namespace rounding;
    const double x = z.re.mag();
    const double y = z.im.mag();
    return sqrt_up(add_up(mul_up(x, x), mul_up(y, y)));
}

} // namespace hyperbox

#endif
