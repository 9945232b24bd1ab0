#include "adpr/regression.hpp"

#include <cmath>

namespace adpr {

NormBounds unit_bounds() {
    return NormBounds{fq_zero, fq_one, fq_zero, fq_one};
}

Accumulators ingest(const Accumulators& acc, SamplePair sample) {
    if (sample.x < fq_zero || sample.x > fq_one || sample.y < fq_zero ||
        sample.y > fq_one) {
        throw DomainError("ingest: sample outside the unit box");
    }
    Accumulators next;
    next.n = acc.n + 1;
    next.sum_x = acc.sum_x + sample.x;
    next.sum_y = acc.sum_y + sample.y;
    next.sum_xx = acc.sum_xx + sample.x * sample.x;
    next.sum_xy = acc.sum_xy + sample.x * sample.y;
    return next;
}

LinearModel ols_fit(const Accumulators& acc) {
    if (acc.n < 2) {
        throw DegenerateData("ols: need at least two samples");
    }
    const FixedQ nvar = acc.nvar();
    if (nvar <= fq_zero) {
        throw DegenerateData("ols: zero variance in x");
    }
    LinearModel model;
    model.slope = acc.ncov() / nvar;
    model.intercept = acc.mean_y() - model.slope * acc.mean_x();
    return model;
}

LinearModel noisystats_fit(const Accumulators& acc, const PrivacyParams& params,
                           NoiseStream& stream) {
    return noisystats_fit_with(
        acc, params.eps, [&stream] { return next_uniform(stream); });
}

FitMetrics metrics(const LinearModel& model, std::span<const SamplePair> data) {
    if (model.failed) {
        throw InvalidModel("metrics: model is bottom");
    }
    if (data.empty()) {
        throw EmptyInput("metrics: no data");
    }
    const double slope = model.slope.to_double();
    const double intercept = model.intercept.to_double();
    const double n = static_cast<double>(data.size());

    double sq = 0.0, ab = 0.0, sx = 0.0, sxx = 0.0;
    for (const SamplePair& s : data) {
        const double x = s.x.to_double();
        const double r = s.y.to_double() - (slope * x + intercept);
        sq += r * r;
        ab += std::abs(r);
        sx += x;
        sxx += x * x;
    }

    FitMetrics out;
    out.mse = sq / n;
    out.mae = ab / n;

    // Classical OLS standard errors with the unbiased residual variance
    // SSR/(n-2); zero when the fit is saturated or exact.
    const double nvar = sxx - sx * sx / n;
    if (data.size() > 2 && nvar > 0.0) {
        const double resid_var = sq / (n - 2.0);
        out.slope_se = std::sqrt(resid_var / nvar);
        out.intercept_se = out.slope_se * std::sqrt(sxx / n);
    }
    return out;
}

LinearModel denormalize(const LinearModel& model, const NormBounds& bounds) {
    if (model.failed) {
        throw InvalidModel("denormalize: model is bottom");
    }
    bounds.validate();
    const FixedQ range_x = bounds.x_max - bounds.x_min;
    const FixedQ range_y = bounds.y_max - bounds.y_min;
    LinearModel out = model;
    out.slope = model.slope * range_y / range_x;
    out.intercept =
        bounds.y_min + model.intercept * range_y - out.slope * bounds.x_min;
    return out;
}

LinearModel aggregate(std::span<const LinearModel> models) {
    if (models.empty()) {
        throw EmptyInput("aggregate: no models");
    }
    FixedQ slope_sum;
    FixedQ intercept_sum;
    bool any_noisy = false;
    for (const LinearModel& m : models) {
        if (m.failed) {
            throw InvalidModel("aggregate: bottom model in input");
        }
        slope_sum += m.slope;
        intercept_sum += m.intercept;
        any_noisy = any_noisy || m.noisy;
    }
    const FixedQ count = FixedQ::from_int(static_cast<std::int64_t>(models.size()));
    LinearModel out;
    out.slope = slope_sum / count;
    out.intercept = intercept_sum / count;
    out.noisy = any_noisy;
    return out;
}

}  // namespace adpr
