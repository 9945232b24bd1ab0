#pragma once

#include <array>
#include <cstdint>

#include "adpr/fixedq.hpp"
#include "adpr/hash.hpp"

namespace adpr {

/// Counter-mode keyed hash stream. Draw i is a pure function of (seed, i),
/// so the verifier can recompute any draw independently. The counter
/// advances by exactly one per 64-bit word drawn.
struct NoiseStream {
    std::array<std::uint8_t, 32> seed{};
    std::uint64_t counter = 0;

    bool operator==(const NoiseStream&) const = default;
};

/// Laplace location/scale pair. scale must be >= 0; a zero scale is the
/// degenerate distribution concentrated at the location.
struct LaplaceParams {
    FixedQ location;
    FixedQ scale;
};

/// Next uniform draw in [0, 1): SHA-256(seed || counter), first 64 bits as
/// a little-endian unsigned integer u, value u * 2^-64 truncated to Q31.32.
/// Advances the stream.
FixedQ next_uniform(NoiseStream& stream);

/// Inverse-CDF transform of one uniform draw into a Laplace variate:
/// u < 1/2 -> location + scale*ln(2u), else location - scale*ln(2(1-u)).
/// Arguments to ln are clamped below at 2^-32. Pure; consumes nothing.
FixedQ laplace_from_uniform(FixedQ u, const LaplaceParams& params);

/// Draw one Laplace variate, consuming exactly one uniform draw (also when
/// scale is zero, so trace draw counts stay input-independent).
FixedQ sample_laplace(NoiseStream& stream, const LaplaceParams& params);

/// Per-draw scale 3*delta/eps shared by all NoisyStats noise draws.
/// eps must be positive and delta non-negative.
FixedQ laplace_scale(FixedQ delta, FixedQ eps);

}  // namespace adpr
