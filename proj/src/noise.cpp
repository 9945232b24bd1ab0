#include "adpr/noise.hpp"

#include "adpr/bytes.hpp"
#include "adpr/errors.hpp"

namespace adpr {

FixedQ next_uniform(NoiseStream& stream) {
    ByteWriter msg;
    msg.bytes(stream.seed);
    msg.u64(stream.counter);
    const Digest32 digest = sha256(msg.view());
    stream.counter += 1;
    const std::uint64_t word = load_u64le(digest.data());
    // u * 2^-64 in Q31.32 is just the top 32 bits of the word.
    return FixedQ::from_raw(static_cast<std::int64_t>(word >> 32));
}

FixedQ laplace_from_uniform(FixedQ u, const LaplaceParams& params) {
    if (params.scale < fq_zero) {
        throw DomainError("laplace: scale must be non-negative");
    }
    if (u < fq_zero || u >= fq_one) {
        throw DomainError("laplace: uniform draw outside [0,1)");
    }
    const FixedQ two = FixedQ::from_int(2);
    const FixedQ floor_arg = FixedQ::from_raw(1);  // 2^-32, keeps ln total
    if (u < fq_half) {
        FixedQ arg = two * u;
        if (arg < floor_arg) {
            arg = floor_arg;
        }
        return params.location + params.scale * ln(arg);
    }
    FixedQ arg = two * (fq_one - u);
    if (arg < floor_arg) {
        arg = floor_arg;
    }
    return params.location - params.scale * ln(arg);
}

FixedQ sample_laplace(NoiseStream& stream, const LaplaceParams& params) {
    return laplace_from_uniform(next_uniform(stream), params);
}

FixedQ laplace_scale(FixedQ delta, FixedQ eps) {
    if (eps <= fq_zero) {
        throw DomainError("laplace_scale: eps must be positive");
    }
    if (delta < fq_zero) {
        throw DomainError("laplace_scale: delta must be non-negative");
    }
    return FixedQ::from_int(3) * delta / eps;
}

}  // namespace adpr
