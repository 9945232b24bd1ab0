#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>

#include "adpr/bytes.hpp"
#include "adpr/fixedq.hpp"
#include "adpr/hash.hpp"

using namespace adpr;

namespace {

using int128 = __int128;

FixedQ fq(double v) { return FixedQ::from_double(v); }

// Reference multiplication: explicit floor division of the 128-bit product
// by 2^32, written independently of the shift in the implementation.
bool oracle_mul(std::int64_t a, std::int64_t b, std::int64_t* out) {
    const int128 product = static_cast<int128>(a) * b;
    int128 q = product / (int128{1} << 32);
    const int128 r = product % (int128{1} << 32);
    if (r != 0 && product < 0) {
        q -= 1;  // floor, not trunc
    }
    if (q < INT64_MIN || q > INT64_MAX) {
        return false;
    }
    *out = static_cast<std::int64_t>(q);
    return true;
}

// Reference division via unsigned magnitudes with the sign applied last
// (truncation toward zero).
bool oracle_div(std::int64_t a, std::int64_t b, std::int64_t* out) {
    if (b == 0) {
        return false;
    }
    const bool negative = (a < 0) != (b < 0);
    const unsigned __int128 num =
        static_cast<unsigned __int128>(a < 0 ? -static_cast<int128>(a)
                                             : static_cast<int128>(a))
        << 32;
    const unsigned __int128 den = static_cast<unsigned __int128>(
        b < 0 ? -static_cast<int128>(b) : static_cast<int128>(b));
    const unsigned __int128 mag = num / den;
    if (negative) {
        if (mag > (static_cast<unsigned __int128>(1) << 63)) {
            return false;
        }
        *out = static_cast<std::int64_t>(-static_cast<int128>(mag));
        return true;
    }
    if (mag > static_cast<unsigned __int128>(INT64_MAX)) {
        return false;
    }
    *out = static_cast<std::int64_t>(mag);
    return true;
}

}  // namespace

TEST_CASE("addition and subtraction") {
    CHECK((fq(1.5) + fq(2.25)).raw() == fq(3.75).raw());
    const FixedQ x = FixedQ::from_rational(-7, 3);
    CHECK((x + fq_zero).raw() == x.raw());
    CHECK((x - x).raw() == 0);
    CHECK_THROWS_AS(FixedQ::from_raw(std::int64_t{1} << 62) +
                        FixedQ::from_raw(std::int64_t{1} << 62),
                    OverflowError);
    CHECK_THROWS_AS(FixedQ::from_raw(INT64_MIN) - FixedQ::from_raw(1),
                    OverflowError);
}

TEST_CASE("multiplication basics") {
    CHECK((fq(0.5) * fq(0.5)).raw() == fq(0.25).raw());
    CHECK((fq(-1.5) * fq(2.0)).raw() == fq(-3.0).raw());
    CHECK((fq(1.0) * fq(1.0)).raw() == fq_one.raw());
    CHECK_THROWS_AS(FixedQ::from_int(1 << 20) * FixedQ::from_int(1 << 20),
                    OverflowError);
}

TEST_CASE("division basics") {
    CHECK((FixedQ::from_int(1) / FixedQ::from_int(4)).raw() == fq(0.25).raw());
    CHECK((FixedQ::from_int(7) / FixedQ::from_int(7)).raw() == fq_one.raw());
    CHECK_THROWS_AS(fq_one / fq_zero, DivisionByZero);
    // 2^30 / 2^-32 leaves the range
    CHECK_THROWS_AS(FixedQ::from_int(1 << 30) / FixedQ::from_raw(1),
                    OverflowError);
}

TEST_CASE("abs, negation, ordering") {
    CHECK(abs(fq(-3.5)).raw() == fq(3.5).raw());
    CHECK(abs(fq(3.5)).raw() == fq(3.5).raw());
    CHECK(fq(1.0) == fq(1.0));
    CHECK(fq(-2.0) < fq(1.0));
    CHECK_THROWS_AS(-FixedQ::from_raw(INT64_MIN), OverflowError);
    CHECK_THROWS_AS(abs(FixedQ::from_raw(INT64_MIN)), OverflowError);
}

TEST_CASE("from_rational round-trips within 2^-32") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20000; ++i) {
        const std::int64_t p = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
        std::int64_t q = static_cast<std::int64_t>(rng() % 2000000) - 1000000;
        if (q == 0) {
            q = 17;
        }
        if (std::abs(static_cast<double>(p) / static_cast<double>(q)) >= 2147483647.0) {
            continue;
        }
        const FixedQ v = FixedQ::from_rational(p, q);
        // |raw/2^32 - p/q| < 2^-32  <=>  |raw*q - p*2^32| < |q|
        const int128 lhs = static_cast<int128>(v.raw()) * q -
                           (static_cast<int128>(p) << 32);
        const int128 mag = lhs < 0 ? -lhs : lhs;
        const int128 qmag = q < 0 ? -static_cast<int128>(q) : q;
        CHECK(mag < qmag);
    }
}

TEST_CASE("from_decimal parses exactly") {
    CHECK(FixedQ::from_decimal("1.5").raw() == fq(1.5).raw());
    CHECK(FixedQ::from_decimal("-0.25").raw() == fq(-0.25).raw());
    CHECK(FixedQ::from_decimal("100").raw() == FixedQ::from_int(100).raw());
    CHECK(FixedQ::from_decimal("+42.0").raw() == FixedQ::from_int(42).raw());
    CHECK(FixedQ::from_decimal(".5").raw() == fq_half.raw());
    // 0.1 truncated toward zero at 2^-32
    CHECK(FixedQ::from_decimal("0.1").raw() ==
          FixedQ::from_rational(1, 10).raw());
    CHECK(FixedQ::from_decimal("-0.1").raw() ==
          FixedQ::from_rational(-1, 10).raw());

    CHECK_THROWS_AS(FixedQ::from_decimal("abc"), DomainError);
    CHECK_THROWS_AS(FixedQ::from_decimal("1."), DomainError);
    CHECK_THROWS_AS(FixedQ::from_decimal("1e3"), DomainError);
    CHECK_THROWS_AS(FixedQ::from_decimal(""), DomainError);
    CHECK_THROWS_AS(FixedQ::from_decimal("--1"), DomainError);
    CHECK_THROWS_AS(FixedQ::from_decimal("99999999999"), OverflowError);
}

TEST_CASE("mul and div match the wide-integer oracle bit-exactly") {
    std::mt19937_64 rng(2024);
    int checked_mul = 0, checked_div = 0;
    for (int i = 0; i < 100000; ++i) {
        // Mixed magnitudes: small values near the unit box plus occasional
        // full-range raws.
        const auto draw = [&rng](int shift) {
            return static_cast<std::int64_t>(rng()) >> shift;
        };
        const std::int64_t a = (i % 4 == 0) ? draw(1) : draw(20);
        const std::int64_t b = (i % 7 == 0) ? draw(1) : draw(24);

        std::int64_t expected;
        if (oracle_mul(a, b, &expected)) {
            CHECK((FixedQ::from_raw(a) * FixedQ::from_raw(b)).raw() == expected);
            ++checked_mul;
        } else {
            CHECK_THROWS_AS(FixedQ::from_raw(a) * FixedQ::from_raw(b),
                            OverflowError);
        }
        if (oracle_div(a, b, &expected)) {
            CHECK((FixedQ::from_raw(a) / FixedQ::from_raw(b)).raw() == expected);
            ++checked_div;
        } else if (b != 0) {
            CHECK_THROWS_AS(FixedQ::from_raw(a) / FixedQ::from_raw(b),
                            OverflowError);
        }
    }
    CHECK(checked_mul > 50000);
    CHECK(checked_div > 50000);
}

TEST_CASE("add and mul commute on non-overflowing inputs") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 20000; ++i) {
        const std::int64_t a = static_cast<std::int64_t>(rng()) >> 18;
        const std::int64_t b = static_cast<std::int64_t>(rng()) >> 18;
        const FixedQ x = FixedQ::from_raw(a), y = FixedQ::from_raw(b);
        try {
            CHECK((x + y).raw() == (y + x).raw());
        } catch (const OverflowError&) {
            CHECK_THROWS_AS(y + x, OverflowError);
        }
        try {
            CHECK((x * y).raw() == (y * x).raw());
        } catch (const OverflowError&) {
            CHECK_THROWS_AS(y * x, OverflowError);
        }
    }
}

TEST_CASE("natural log meets the 2^-28 bound") {
    CHECK(ln(fq_one).raw() == 0);

    const double bound = std::ldexp(1.0, -28);
    CHECK(std::abs(ln(FixedQ::from_int(2)).to_double() - 0.6931471805599453) <
          bound);

    CHECK_THROWS_AS(ln(fq_zero), DomainError);
    CHECK_THROWS_AS(ln(fq(-1.0)), DomainError);

    // 10^4 random arguments across (2^-20, 2^20) against long double logl,
    // whose own error is orders of magnitude below the bound under test.
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const int exponent = static_cast<int>(rng() % 40) - 20;  // [-20, 19]
        const std::uint64_t span = std::uint64_t{1} << (32 + exponent);
        const std::int64_t raw = static_cast<std::int64_t>(span + rng() % span);
        const FixedQ u = FixedQ::from_raw(raw);
        const long double exact = logl(static_cast<long double>(raw) / 4294967296.0L);
        const double err = std::abs(static_cast<double>(
            static_cast<long double>(ln(u).to_double()) - exact));
        worst = std::max(worst, err);
    }
    CHECK(worst <= bound);
}

TEST_CASE("natural log holds the bound across the whole positive range") {
    // The sampler clamps ln arguments at 2^-32, so the bound has to hold
    // well outside the sampled (2^-20, 2^20) window too.
    std::mt19937_64 rng(6);
    const double bound = std::ldexp(1.0, -28);
    double worst = 0.0;
    for (int i = 0; i < 4000; ++i) {
        const int exponent = static_cast<int>(rng() % 62) - 32;  // [-32, 29]
        const std::uint64_t span = std::uint64_t{1} << (32 + exponent);
        const std::int64_t raw = static_cast<std::int64_t>(span + rng() % span);
        const long double exact =
            logl(static_cast<long double>(raw) / 4294967296.0L);
        const double err = std::abs(static_cast<double>(
            static_cast<long double>(ln(FixedQ::from_raw(raw)).to_double()) -
            exact));
        worst = std::max(worst, err);
    }
    // Extremes of the range as well: 2^-32 and just below 2^31.
    for (const std::int64_t raw : {std::int64_t{1}, std::int64_t{2},
                                   INT64_MAX - 1, INT64_MAX}) {
        const long double exact =
            logl(static_cast<long double>(raw) / 4294967296.0L);
        const double err = std::abs(static_cast<double>(
            static_cast<long double>(ln(FixedQ::from_raw(raw)).to_double()) -
            exact));
        worst = std::max(worst, err);
    }
    CHECK(worst <= bound);
}

TEST_CASE("scripted arithmetic sequence hashes to the frozen constant") {
    // 10^4 deterministic operations; any cross-platform or regression drift
    // in rounding shows up as a different digest.
    ByteWriter transcript;
    FixedQ a = FixedQ::from_rational(3, 7);
    FixedQ b = FixedQ::from_rational(-22, 9);
    for (int i = 1; i <= 10000; ++i) {
        const FixedQ c = FixedQ::from_rational(i % 997 + 1, (i % 31) + 2);
        switch (i % 4) {
            case 0: a = (a + c) - b; break;
            case 1: b = a * c; break;
            case 2: a = b / (c + fq_one); break;
            case 3: b = ln(abs(a) + fq_one) - c; break;
        }
        transcript.i64(a.raw());
        transcript.i64(b.raw());
    }
    const std::string digest = to_hex(sha256(transcript.view()));
    CHECK(digest == "53453a7cdffcf6d787e2f9b764e9bf46308fcdf627ac72163519ea0b6e851ce3");
}
