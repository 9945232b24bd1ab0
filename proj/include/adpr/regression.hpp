#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

#include "adpr/errors.hpp"
#include "adpr/fixedq.hpp"
#include "adpr/noise.hpp"

namespace adpr {

/// One normalized observation; both components live in [0, 1].
struct SamplePair {
    FixedQ x;
    FixedQ y;

    bool operator==(const SamplePair&) const = default;
};

/// Normalization box for raw records. Protocol input, committed in the
/// journal; never derived from the data itself (that would leak record
/// information outside the DP mechanism).
struct NormBounds {
    FixedQ x_min, x_max;
    FixedQ y_min, y_max;

    bool operator==(const NormBounds&) const = default;

    void validate() const {
        if (!(x_min < x_max) || !(y_min < y_max)) {
            throw DomainError("bounds: min must be strictly below max");
        }
    }

    bool contains_raw(FixedQ x, FixedQ y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
};

/// Identity box [0,1]x[0,1].
NormBounds unit_bounds();

/// Streaming sufficient statistics over normalized samples. The exact
/// fixed-point fold order is semantic: it is what the attested per-step
/// transition recomputes.
struct Accumulators {
    std::uint64_t n = 0;
    FixedQ sum_x;
    FixedQ sum_y;
    FixedQ sum_xx;
    FixedQ sum_xy;

    bool operator==(const Accumulators&) const = default;

    FixedQ count_fq() const { return FixedQ::from_int(static_cast<std::int64_t>(n)); }
    FixedQ mean_x() const { return sum_x / count_fq(); }
    FixedQ mean_y() const { return sum_y / count_fq(); }

    // ncov = sum_xy - mean_x*sum_y and nvar = sum_xx - mean_x*sum_x.
    // Dividing by n before multiplying keeps the intermediate product
    // inside Q31.32 for sums up to n = 50,000.
    FixedQ ncov() const { return sum_xy - mean_x() * sum_y; }
    FixedQ nvar() const { return sum_xx - mean_x() * sum_x; }
};

/// One guest transition: append a sample to the running sums.
/// Components must lie in [0, 1].
Accumulators ingest(const Accumulators& acc, SamplePair sample);

/// Fitted line. `failed` marks the bottom output of the noisy fit; a failed
/// model carries no coefficients and must not be aggregated or denormalized.
struct LinearModel {
    FixedQ slope;
    FixedQ intercept;
    bool noisy = false;
    bool failed = false;

    bool operator==(const LinearModel&) const = default;
};

/// (eps, 0)-DP privacy parameters plus the committed noise seed; delta is
/// identically zero.
struct PrivacyParams {
    FixedQ eps;
    std::array<std::uint8_t, 32> seed{};
};

/// Ordinary least squares from the sufficient statistics: slope =
/// ncov/nvar, intercept = mean_y - slope*mean_x. Requires n >= 2 and
/// positive variance.
LinearModel ols_fit(const Accumulators& acc);

/// Noisy least-squares fit over an arbitrary uniform supplier.
///
/// Draw order is fixed and committed: L1, then L2, then (only on the
/// success branch) L3. Exactly three uniforms are consumed on success and
/// exactly two on the failure branch; `draws_out`, when non-null, receives
/// the count. The zero-noise supplier (every draw 1/2) makes this
/// bit-identical to ols_fit.
///
/// n = 1 is accepted and deterministically returns the failed model: the
/// sensitivity 1 - 1/n is zero, so L2 is exactly zero and the noisy
/// variance test fails.
template <typename NextUniform>
LinearModel noisystats_fit_with(const Accumulators& acc, FixedQ eps,
                                NextUniform&& next_u,
                                std::uint64_t* draws_out = nullptr) {
    if (acc.n == 0) {
        throw DomainError("noisystats: no samples ingested");
    }
    if (eps <= fq_zero) {
        throw DomainError("noisystats: eps must be positive");
    }
    const FixedQ sensitivity = fq_one - fq_one / acc.count_fq();
    const FixedQ scale = laplace_scale(sensitivity, eps);

    std::uint64_t draws = 0;
    const auto draw = [&](FixedQ b) {
        ++draws;
        return laplace_from_uniform(next_u(), LaplaceParams{fq_zero, b});
    };

    const FixedQ noise_cov = draw(scale);   // L1
    const FixedQ noise_var = draw(scale);   // L2

    LinearModel model;
    const FixedQ noisy_nvar = acc.nvar() + noise_var;
    if (noisy_nvar > fq_zero) {
        const FixedQ slope = (acc.ncov() + noise_cov) / noisy_nvar;
        const FixedQ sens3 = (fq_one / acc.count_fq()) * (fq_one + abs(slope));
        const FixedQ noise_intercept = draw(laplace_scale(sens3, eps));  // L3
        model.slope = slope;
        model.intercept = (acc.mean_y() - slope * acc.mean_x()) + noise_intercept;
        model.noisy = true;
    } else {
        model.failed = true;
    }
    if (draws_out != nullptr) {
        *draws_out = draws;
    }
    return model;
}

/// Production noisy fit drawing from the committed stream.
LinearModel noisystats_fit(const Accumulators& acc, const PrivacyParams& params,
                           NoiseStream& stream);

/// Reporting-level fit diagnostics, computed in double precision outside
/// the attested computation.
struct FitMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
};

FitMetrics metrics(const LinearModel& model, std::span<const SamplePair> data);

/// Map a unit-box model back to raw data units.
LinearModel denormalize(const LinearModel& model, const NormBounds& bounds);

/// Unweighted mean of slopes and intercepts.
LinearModel aggregate(std::span<const LinearModel> models);

}  // namespace adpr
