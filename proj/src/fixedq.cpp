#include "adpr/fixedq.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace adpr {

namespace {

using int128 = __int128;

constexpr std::int64_t kRawMin = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kRawMax = std::numeric_limits<std::int64_t>::max();

// round(ln 2 * 2^32)
constexpr std::int64_t kLn2Raw = 2977044472;

std::int64_t narrow_or_throw(int128 v, const char* op) {
    if (v < static_cast<int128>(kRawMin) || v > static_cast<int128>(kRawMax)) {
        throw OverflowError(std::string(op) + ": result outside Q31.32 range");
    }
    return static_cast<std::int64_t>(v);
}

}  // namespace

FixedQ FixedQ::from_int(std::int64_t v) {
    if (v < -(std::int64_t{1} << 31) || v > (std::int64_t{1} << 31) - 1) {
        throw OverflowError("from_int: value outside Q31.32 range");
    }
    return from_raw(v << 32);
}

FixedQ FixedQ::from_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw DivisionByZero("from_rational: zero denominator");
    }
    const int128 scaled = static_cast<int128>(num) << 32;
    return from_raw(narrow_or_throw(scaled / den, "from_rational"));
}

FixedQ FixedQ::from_double(double v) {
    if (!std::isfinite(v)) {
        throw DomainError("from_double: value not finite");
    }
    const double scaled = std::nearbyint(v * 4294967296.0);
    if (scaled < -9223372036854775808.0 || scaled >= 9223372036854775808.0) {
        throw OverflowError("from_double: value outside Q31.32 range");
    }
    return from_raw(static_cast<std::int64_t>(scaled));
}

FixedQ FixedQ::from_decimal(std::string_view text) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    unsigned __int128 int_part = 0;
    std::size_t int_digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        int_part = int_part * 10 + static_cast<unsigned>(text[pos] - '0');
        ++int_digits;
        // An 11-digit integer part is already past 2^31; bailing here also
        // keeps mantissa << 32 inside 128 bits.
        if (int_digits > 10) {
            throw OverflowError("from_decimal: integer part too large");
        }
        ++pos;
    }
    unsigned __int128 frac_part = 0;
    std::uint64_t frac_scale = 1;
    std::size_t frac_digits = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
            throw DomainError("from_decimal: digits required after decimal point");
        }
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            if (frac_digits < 18) {
                frac_part = frac_part * 10 + static_cast<unsigned>(text[pos] - '0');
                frac_scale *= 10;
                ++frac_digits;
            }
            ++pos;
        }
    }
    if (pos != text.size() || int_digits + frac_digits == 0) {
        throw DomainError("from_decimal: not a plain decimal literal: '" +
                          std::string(text) + "'");
    }
    // trunc((int_part * scale + frac) * 2^32 / scale), toward zero.
    const unsigned __int128 mantissa = int_part * frac_scale + frac_part;
    const unsigned __int128 raw_mag = (mantissa << 32) / frac_scale;
    constexpr unsigned __int128 kMaxMag =
        static_cast<unsigned __int128>(1) << 63;
    if (raw_mag > (negative ? kMaxMag : kMaxMag - 1)) {
        throw OverflowError("from_decimal: value outside Q31.32 range");
    }
    const std::int64_t raw =
        negative ? static_cast<std::int64_t>(-static_cast<int128>(raw_mag))
                 : static_cast<std::int64_t>(raw_mag);
    return from_raw(raw);
}

double FixedQ::to_double() const noexcept {
    return static_cast<double>(raw_) / 4294967296.0;
}

FixedQ operator+(FixedQ a, FixedQ b) {
    std::int64_t out;
    if (__builtin_add_overflow(a.raw_, b.raw_, &out)) {
        throw OverflowError("add: result outside Q31.32 range");
    }
    return FixedQ::from_raw(out);
}

FixedQ operator-(FixedQ a, FixedQ b) {
    std::int64_t out;
    if (__builtin_sub_overflow(a.raw_, b.raw_, &out)) {
        throw OverflowError("sub: result outside Q31.32 range");
    }
    return FixedQ::from_raw(out);
}

FixedQ operator*(FixedQ a, FixedQ b) {
    // 128-bit exact product, then floor to 32 fractional bits. Arithmetic
    // right shift of a signed value truncates toward negative infinity.
    const int128 product = static_cast<int128>(a.raw_) * b.raw_;
    return FixedQ::from_raw(narrow_or_throw(product >> 32, "mul"));
}

FixedQ operator/(FixedQ a, FixedQ b) {
    if (b.raw_ == 0) {
        throw DivisionByZero("div: zero divisor");
    }
    // (a.raw << 32) / b.raw in 128-bit; C++ integer division truncates
    // toward zero.
    const int128 scaled = static_cast<int128>(a.raw_) << 32;
    return FixedQ::from_raw(narrow_or_throw(scaled / b.raw_, "div"));
}

FixedQ FixedQ::operator-() const {
    if (raw_ == kRawMin) {
        throw OverflowError("neg: most negative value has no negation");
    }
    return from_raw(-raw_);
}

FixedQ abs(FixedQ a) {
    return a.raw() < 0 ? -a : a;
}

FixedQ ln(FixedQ u) {
    if (u.raw() <= 0) {
        throw DomainError("ln: argument must be positive");
    }
    // u = m * 2^e, m in [1, 2). m is carried in Q.48; when u has more than
    // 49 significant bits the discarded tail is below 2^-48 relative.
    const std::uint64_t raw = static_cast<std::uint64_t>(u.raw());
    const int msb = 63 - std::countl_zero(raw);
    const int e = msb - 32;
    const std::int64_t m_q48 =
        e <= 16 ? static_cast<std::int64_t>(raw << (16 - e))
                : static_cast<std::int64_t>(raw >> (e - 16));

    // ln m = 2 * atanh(z), z = (m-1)/(m+1) in [0, 1/3).
    constexpr std::int64_t kOneQ48 = std::int64_t{1} << 48;
    const std::int64_t z_q48 = static_cast<std::int64_t>(
        (static_cast<int128>(m_q48 - kOneQ48) << 48) / (m_q48 + kOneQ48));
    const std::int64_t z2_q48 =
        static_cast<std::int64_t>((static_cast<int128>(z_q48) * z_q48) >> 48);

    std::int64_t term_q48 = z_q48;  // z^(2k+1)
    std::int64_t sum_q48 = z_q48;
    for (std::int64_t k = 1; k <= 16; ++k) {
        term_q48 = static_cast<std::int64_t>(
            (static_cast<int128>(term_q48) * z2_q48) >> 48);
        const std::int64_t contribution = term_q48 / (2 * k + 1);
        if (contribution == 0) {
            break;
        }
        sum_q48 += contribution;
    }

    const std::int64_t ln_m_raw = (2 * sum_q48) >> 16;
    return FixedQ::from_raw(ln_m_raw + static_cast<std::int64_t>(e) * kLn2Raw);
}

}  // namespace adpr
