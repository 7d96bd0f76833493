#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "hyperbox/decimal.hpp"
#include "hyperbox/interval.hpp"
#include "oracles.hpp"

using namespace hyperbox;
using oracle::exact;
using oracle::Rational;
using oracle::random_double;
using oracle::random_interval;

namespace {

double ulp(double x) { return std::nextafter(std::fabs(x), rounding::kInf) - std::fabs(x); }

bool encloses(const Interval& r, const Rational& lo, const Rational& hi) {
    return oracle::lower_bounds(r.lo(), lo) && oracle::upper_bounds(r.hi(), hi);
}

} // namespace

TEST(Hull, DyadicIsExact) {
    const Interval h = hull("0.5");
    EXPECT_EQ(h.lo(), 0.5);
    EXPECT_EQ(h.hi(), 0.5);
}

TEST(Hull, OneTenthStraddlesWithinOneUlp) {
    const Interval h = hull("0.1");
    const Rational tenth = Rational(1) / 10;
    EXPECT_LT(exact(h.lo()), tenth);
    EXPECT_GT(exact(h.hi()), tenth);
    EXPECT_EQ(std::nextafter(h.lo(), 1.0), h.hi());
}

TEST(Hull, OneThirdStraddles) {
    const Interval h = hull_rational(1, 3);
    const Rational third = Rational(1) / 3;
    EXPECT_LT(exact(h.lo()), third);
    EXPECT_GT(exact(h.hi()), third);
    EXPECT_LE(h.hi() - h.lo(), ulp(1.0 / 3.0));
}

TEST(Hull, NegativeAndExponentForms) {
    EXPECT_EQ(hull("-2.5e-1"), Interval::point(-0.25));
    const Interval h = hull("-0.44");
    EXPECT_LT(exact(h.lo()), -Rational(44) / 100);
    EXPECT_GT(exact(h.hi()), -Rational(44) / 100);
}

TEST(Hull, HugeLiteralGivesInfiniteEndpoint) {
    const Interval h = hull("1e400");
    EXPECT_TRUE(std::isinf(h.hi()));
    EXPECT_FALSE(h.bounded());
}

TEST(Interval, ConstructorRejectsReversedOrNaN) {
    EXPECT_THROW(Interval(2.0, 1.0), DomainError);
    EXPECT_THROW(Interval(std::nan(""), 1.0), DomainError);
}

TEST(Interval, AdditionOfDyadicsIsExact) {
    const Interval r = Interval(1, 2) + Interval(3, 4);
    EXPECT_EQ(r, Interval(4, 6));
}

TEST(Interval, MultiplicationSignCases) {
    const Interval r = Interval(-1, 2) * Interval(3, 5);
    EXPECT_EQ(r, Interval(-5, 10));
}

TEST(Interval, DivisionByZeroIntervalThrows) {
    EXPECT_THROW(Interval(1, 2) / Interval(-1, 1), DivisionByIntervalContainingZero);
    EXPECT_THROW(Interval(1, 2) / Interval(0, 1), DivisionByIntervalContainingZero);
}

TEST(Interval, SqrOfStraddlingInterval) {
    const Interval r = sqr(Interval(-1, 2));
    EXPECT_EQ(r.lo(), 0.0);
    EXPECT_EQ(r.hi(), 4.0);
}

TEST(Interval, RandomOperationsContainExactResult) {
    std::mt19937_64 rng(7);
    int violations = 0;
    for (int t = 0; t < 10000; ++t) {
        const Interval a = random_interval(rng);
        Interval b = random_interval(rng);
        const int op = t % 4;
        if (op == 3 && b.contains_zero()) b = Interval(std::fabs(b.hi()) + 1.0, std::fabs(b.hi()) + 2.0);
        Interval r;
        switch (op) {
        case 0: r = a + b; break;
        case 1: r = a - b; break;
        case 2: r = a * b; break;
        default: r = a / b; break;
        }
        std::vector<Rational> ends;
        for (double x : {a.lo(), a.hi()}) {
            for (double y : {b.lo(), b.hi()}) {
                const Rational X = exact(x), Y = exact(y);
                ends.push_back(op == 0 ? X + Y : op == 1 ? X - Y : op == 2 ? X * Y : X / Y);
            }
        }
        const auto [lo, hi] = std::minmax_element(ends.begin(), ends.end());
        if (!encloses(r, *lo, *hi)) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(Interval, EndpointsWithinOneUlpOfExactHull) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int t = 0; t < 2000; ++t) {
        const double x = u(rng), y = u(rng);
        const Interval p = Interval::point(x) * Interval::point(y);
        const Interval s = Interval::point(x) + Interval::point(y);
        EXPECT_LE(p.hi() - p.lo(), 2 * ulp(x * y));
        EXPECT_LE(s.hi() - s.lo(), 2 * ulp(x + y));
    }
}

TEST(Interval, SqrtAndPowContainment) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int t = 0; t < 2000; ++t) {
        const double x = u(rng);
        const double lo = rounding::sqrt_down(x), hi = rounding::sqrt_up(x);
        EXPECT_LE(exact(lo) * exact(lo), exact(x));
        EXPECT_GE(exact(hi) * exact(hi), exact(x));
        const unsigned n = 2 + t % 5;
        const Interval p = pow(Interval::point(x / 10), n);
        const Rational e = oracle::rpow(exact(x / 10), n);
        EXPECT_TRUE(encloses(p, e, e));
    }
}

TEST(Interval, InclusionMonotone) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 1000; ++t) {
        const Interval a = random_interval(rng), b = random_interval(rng);
        const Interval a2 = inflate(a, 1.0), b2 = inflate(b, 1.0);
        EXPECT_TRUE((a2 + b2).contains(a + b));
        EXPECT_TRUE((a2 * b2).contains(a * b));
    }
}

TEST(NthRootLower, Examples) {
    EXPECT_EQ(nth_root_lower(Interval::point(4), 2), 2.0);
    const double r = nth_root_lower(Interval::point(6), 3);
    EXPECT_NEAR(r, 1.8171, 1e-4);
    EXPECT_LE(oracle::rpow(exact(r), 3), Rational(6));
    EXPECT_THROW(nth_root_lower(Interval(-1, 1), 2), DomainError);
}

TEST(NthRootLower, RandomExactPowerCheck) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(1e-3, 1e3);
    int violations = 0, loose = 0;
    for (int t = 0; t < 3000; ++t) {
        const double x = u(rng);
        const unsigned n = 1 + t % 12;
        const double v = nth_root_lower(Interval::point(x), n);
        if (oracle::rpow(exact(v), n) > exact(x)) ++violations;
        // Tight to a few ulps.
        double w = v;
        for (int k = 0; k < 4; ++k) w = std::nextafter(w, rounding::kInf);
        if (oracle::rpow(exact(w), n) <= exact(x)) ++loose;
    }
    EXPECT_EQ(violations, 0);
    EXPECT_EQ(loose, 0);
}

TEST(Modulus, Examples) {
    EXPECT_EQ(modulus_lower(ComplexBox::point(3, 4)), 5.0);
    EXPECT_EQ(modulus_upper(ComplexBox::point(3, 4)), 5.0);
    const ComplexBox b{Interval(1, 2), Interval(-1, 1)};
    EXPECT_EQ(modulus_lower(b), 1.0);
    EXPECT_GE(exact(modulus_upper(b)) * exact(modulus_upper(b)), Rational(5));
    EXPECT_LE(modulus_upper(b), std::sqrt(5.0) * (1 + 1e-15));
    EXPECT_EQ(modulus_lower(ComplexBox{Interval(-1, 1), Interval(-2, 3)}), 0.0);
}

TEST(Modulus, RandomBoxesExactSquares) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    int violations = 0;
    for (int t = 0; t < 5000; ++t) {
        double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        const ComplexBox b{Interval(x0, x1), Interval(y0, y1)};
        // Nearest point: clamp 0 into each side; farthest: a corner.
        const double nx = std::clamp(0.0, x0, x1), ny = std::clamp(0.0, y0, y1);
        const Rational near2 = exact(nx) * exact(nx) + exact(ny) * exact(ny);
        const double lo = modulus_lower(b), hi = modulus_upper(b);
        if (exact(lo) * exact(lo) > near2) ++violations;
        for (double cx : {x0, x1}) {
            for (double cy : {y0, y1}) {
                const Rational c2 = exact(cx) * exact(cx) + exact(cy) * exact(cy);
                if (exact(hi) * exact(hi) < c2 || exact(lo) * exact(lo) > c2) ++violations;
            }
        }
    }
    EXPECT_EQ(violations, 0);
}

TEST(ComplexBox, Products) {
    const ComplexBox one = sqr(ComplexBox::point(1, 0));
    EXPECT_TRUE(one.contains(std::complex<double>(1, 0)));
    const ComplexBox i2 = ComplexBox::point(0, 1) * ComplexBox::point(0, 1);
    EXPECT_TRUE(i2.contains(std::complex<double>(-1, 0)));
}

TEST(ComplexBox, SquareOfUnitSquareBySampling) {
    const ComplexBox sq{Interval(0, 1), Interval(0, 1)};
    const ComplexBox img = sqr(sq);
    const ComplexBox img3 = pow(sq, 3);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10000; ++t) {
        const double x = u(rng), y = u(rng);
        // Exact z^2 components.
        const Rational X = exact(x), Y = exact(y);
        EXPECT_TRUE(exact(img.re.lo()) <= X * X - Y * Y && X * X - Y * Y <= exact(img.re.hi()));
        EXPECT_TRUE(exact(img.im.lo()) <= 2 * X * Y && 2 * X * Y <= exact(img.im.hi()));
        const Rational re3 = X * X * X - 3 * X * Y * Y, im3 = 3 * X * X * Y - Y * Y * Y;
        EXPECT_TRUE(exact(img3.re.lo()) <= re3 && re3 <= exact(img3.re.hi()));
        EXPECT_TRUE(exact(img3.im.lo()) <= im3 && im3 <= exact(img3.im.hi()));
    }
}

TEST(Decimal, FormatParseRoundTrip) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 2000; ++t) {
        const double x = random_double(rng);
        const std::string s = decimal::format_exact(x);
        const auto p = decimal::parse_nearest(s);
        EXPECT_EQ(p.value, x);
        EXPECT_EQ(p.literal_vs_value, std::strong_ordering::equal) << s;
    }
}
