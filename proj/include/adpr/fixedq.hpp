#pragma once

#include <compare>
#include <cstdint>
#include <string_view>

#include "adpr/errors.hpp"

namespace adpr {

/// Signed Q31.32 fixed-point scalar: value = raw / 2^32.
///
/// This is the only numeric type used inside the guest computation, so every
/// operation is deterministic integer arithmetic with a single fixed rounding
/// rule: multiplication truncates toward negative infinity (floor), division
/// truncates toward zero. The representable range is [-2^31, 2^31 - 2^-32];
/// an operation whose exact result leaves it throws OverflowError rather
/// than wrapping, because a wrapped value inside an attested trace would be
/// silently wrong.
class FixedQ {
public:
    static constexpr int frac_bits = 32;

    constexpr FixedQ() = default;

    static constexpr FixedQ from_raw(std::int64_t raw) noexcept {
        FixedQ q;
        q.raw_ = raw;
        return q;
    }

    /// Exact conversion; |v| must fit the 31 integer bits.
    static FixedQ from_int(std::int64_t v);

    /// num/den truncated toward zero at 2^-32, same rule as operator/.
    static FixedQ from_rational(std::int64_t num, std::int64_t den);

    /// Nearest representable value. Host-side convenience only; attested
    /// inputs go through from_decimal or from_rational instead.
    static FixedQ from_double(double v);

    /// Exact parse of a plain decimal literal ("-12.5", "0.125"). The value
    /// is truncated toward zero at 2^-32. Fractional digits beyond the 18th
    /// are ignored; they are far below the representable resolution.
    static FixedQ from_decimal(std::string_view text);

    constexpr std::int64_t raw() const noexcept { return raw_; }
    double to_double() const noexcept;

    friend FixedQ operator+(FixedQ a, FixedQ b);
    friend FixedQ operator-(FixedQ a, FixedQ b);
    friend FixedQ operator*(FixedQ a, FixedQ b);
    friend FixedQ operator/(FixedQ a, FixedQ b);
    FixedQ operator-() const;

    FixedQ& operator+=(FixedQ o) { return *this = *this + o; }
    FixedQ& operator-=(FixedQ o) { return *this = *this - o; }
    FixedQ& operator*=(FixedQ o) { return *this = *this * o; }
    FixedQ& operator/=(FixedQ o) { return *this = *this / o; }

    // Raw two's-complement order is value order; this is the fq_cmp total
    // order.
    friend constexpr auto operator<=>(FixedQ a, FixedQ b) noexcept = default;

private:
    std::int64_t raw_ = 0;
};

/// |a|; throws OverflowError for the most negative raw value.
FixedQ abs(FixedQ a);

/// Natural logarithm, u > 0, absolute error <= 2^-28.
///
/// Range-reduces u = m * 2^e with m in [1, 2), evaluates
/// ln m = 2 * atanh((m-1)/(m+1)) as a truncated series in Q.48 integer
/// arithmetic, and adds e * ln2 with ln2 held as a compile-time Q31.32
/// constant. Fully deterministic.
FixedQ ln(FixedQ u);

inline const FixedQ fq_zero = FixedQ::from_raw(0);
inline const FixedQ fq_one = FixedQ::from_raw(std::int64_t{1} << 32);
inline const FixedQ fq_half = FixedQ::from_raw(std::int64_t{1} << 31);

}  // namespace adpr
