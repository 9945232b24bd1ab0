#include "adpr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "adpr/bytes.hpp"

namespace adpr {

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid]
                                  : 0.5 * (values[mid - 1] + values[mid]);
}

template <typename Fn>
double time_ms(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

BatchPlan plan_batches(std::uint64_t n, std::uint64_t batch_size) {
    if (n == 0) {
        throw EmptyInput("plan_batches: n must be at least 1");
    }
    if (batch_size == 0) {
        throw DomainError("plan_batches: batch_size must be at least 1");
    }
    BatchPlan plan;
    plan.batch_size = batch_size;
    for (std::uint64_t offset = 0; offset < n; offset += batch_size) {
        plan.batches.push_back(Batch{offset, std::min(batch_size, n - offset)});
    }
    return plan;
}

std::array<std::uint8_t, 32> derive_batch_seed(
    const std::array<std::uint8_t, 32>& root_seed, std::uint64_t index) {
    ByteWriter w;
    w.bytes(root_seed);
    w.u64(index);
    return sha256(w.view());
}

std::vector<BatchOutcome> prove_all(const Dataset& dataset,
                                    const PrivacyParams& params,
                                    const BatchPlan& plan, unsigned parallelism,
                                    std::string_view backend_id) {
    if (plan.batches.empty()) {
        throw EmptyInput("prove_all: empty plan");
    }
    const std::uint64_t covered =
        plan.batches.back().offset + plan.batches.back().length;
    if (covered != dataset.n()) {
        throw DomainError("prove_all: plan does not cover the dataset");
    }
    const AttestationBackend& backend = attestation_backend(backend_id);

    std::vector<BatchOutcome> outcomes(plan.batches.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.batches.size()) {
                return;
            }
            BatchOutcome& outcome = outcomes[i];
            outcome.index = i;
            try {
                const Batch& batch = plan.batches[i];
                Dataset slice;
                slice.bounds = dataset.bounds;
                slice.samples.assign(
                    dataset.samples.begin() + static_cast<std::ptrdiff_t>(batch.offset),
                    dataset.samples.begin() +
                        static_cast<std::ptrdiff_t>(batch.offset + batch.length));
                outcome.blob_bytes = pack_blob(slice);
                const DatasetBlob blob = load_blob(outcome.blob_bytes);
                const PrivacyParams batch_params{params.eps,
                                                 derive_batch_seed(params.seed, i)};
                outcome.receipt = backend.prove(blob, batch_params);
            } catch (const std::exception& e) {
                outcome.receipt.reset();
                outcome.error = e.what();
            }
        }
    };

    const unsigned workers =
        std::max(1u, std::min<unsigned>(parallelism,
                                        static_cast<unsigned>(plan.batches.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }
    return outcomes;
}

AggregateOutcome aggregate_outcomes(std::span<const BatchOutcome> outcomes) {
    std::vector<LinearModel> models;
    models.reserve(outcomes.size());
    std::size_t skipped = 0;
    for (const BatchOutcome& outcome : outcomes) {
        if (!outcome.error.empty() || !outcome.receipt.has_value()) {
            throw Error("aggregate: batch " + std::to_string(outcome.index) +
                        " failed: " + outcome.error);
        }
        if (outcome.bottom()) {
            ++skipped;
            continue;
        }
        models.push_back(outcome.receipt->journal.result);
    }
    if (models.empty()) {
        throw EmptyInput("aggregate: every batch returned bottom");
    }
    AggregateOutcome out;
    out.model = aggregate(models);
    out.used = models.size();
    out.skipped_bottom = skipped;
    return out;
}

std::vector<ProgressionRow> progression_report(const Dataset& dataset,
                                               const PrivacyParams& params,
                                               const BatchPlan& plan) {
    const NormBounds& bounds = dataset.bounds;
    const double x_lo = bounds.x_min.to_double();
    const double x_range = bounds.x_max.to_double() - x_lo;
    const double y_lo = bounds.y_min.to_double();
    const double y_range = bounds.y_max.to_double() - y_lo;

    std::vector<ProgressionRow> rows;
    rows.reserve(plan.batches.size());
    Accumulators cumulative;
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
        const Batch& batch = plan.batches[b];
        Accumulators local;
        for (std::uint64_t i = 0; i < batch.length; ++i) {
            const SamplePair& s = dataset.samples[batch.offset + i];
            local = ingest(local, s);
            cumulative = ingest(cumulative, s);
        }

        ProgressionRow row;
        row.batch = b;
        row.batch_mean_x = x_lo + local.mean_x().to_double() * x_range;
        row.batch_mean_y = y_lo + local.mean_y().to_double() * y_range;
        try {
            const LinearModel fit = denormalize(ols_fit(cumulative), bounds);
            row.slope = fit.slope.to_double();
            row.intercept = fit.intercept.to_double();
        } catch (const DegenerateData&) {
            row.slope = std::nan("");
            row.intercept = std::nan("");
        }

        NoiseStream stream{derive_batch_seed(params.seed, b), 0};
        const LinearModel noisy = noisystats_fit(cumulative, params, stream);
        if (noisy.failed) {
            row.noisy_failed = true;
            row.noisy_intercept = std::nan("");
        } else {
            row.noisy_intercept = denormalize(noisy, bounds).intercept.to_double();
        }
        rows.push_back(row);
    }
    return rows;
}

std::string progression_to_csv(std::span<const ProgressionRow> rows) {
    std::string out = "iteration,x_mean,y_mean,slope,intercept,noisy_intercept\n";
    for (const ProgressionRow& row : rows) {
        out += std::to_string(row.batch + 1);
        out += ',' + format_double(row.batch_mean_x);
        out += ',' + format_double(row.batch_mean_y);
        out += ',' + format_double(row.slope);
        out += ',' + format_double(row.intercept);
        out += ',' + format_double(row.noisy_intercept);
        out += '\n';
    }
    return out;
}

BenchReport run_bench(std::span<const std::uint64_t> sizes,
                      const PrivacyParams& params, std::string_view backend_id,
                      int repetitions) {
    if (sizes.empty()) {
        throw EmptyInput("bench: no sizes");
    }
    repetitions = std::max(repetitions, 3);
    const AttestationBackend& backend = attestation_backend(backend_id);

    // Fixed synthetic population: an age-like x over [0,100] against a
    // cost-like y, 0.6/0.2 slope/intercept and 5% noise once normalized.
    SyntheticSpec spec;
    spec.slope = 600.0;
    spec.intercept = 20000.0;
    spec.noise_sd = 5000.0;
    spec.bounds = NormBounds{FixedQ::from_int(0), FixedQ::from_int(100),
                             FixedQ::from_int(0), FixedQ::from_int(100000)};

    BenchReport report;
    const std::uint64_t largest = *std::max_element(sizes.begin(), sizes.end());
    for (const std::uint64_t size : sizes) {
        spec.n = size;
        spec.seed = size;
        const Dataset dataset = gen_synthetic(spec);
        const std::vector<std::uint8_t> bytes = pack_blob(dataset);
        const DatasetBlob blob = load_blob(bytes);

        Receipt receipt;
        std::vector<double> prove_times, verify_times;
        for (int rep = 0; rep < repetitions; ++rep) {
            prove_times.push_back(
                time_ms([&] { receipt = backend.prove(blob, params); }));
        }
        for (int rep = 0; rep < repetitions; ++rep) {
            VerifyResult result;
            verify_times.push_back(
                time_ms([&] { result = backend.verify(receipt, blob); }));
            if (!result.ok) {
                throw Error("bench: verification rejected: " + result.reason);
            }
        }
        report.timing.push_back(BenchTimingRow{size, std::string(backend.id()),
                                               size, median(prove_times),
                                               median(verify_times)});

        if (size == largest && !receipt.journal.result.failed) {
            Accumulators acc;
            for (const SamplePair& s : dataset.samples) {
                acc = ingest(acc, s);
            }
            const LinearModel plain = ols_fit(acc);
            // Scale unit-box metrics back to raw data units for the table.
            const double x_range =
                spec.bounds.x_max.to_double() - spec.bounds.x_min.to_double();
            const double y_range =
                spec.bounds.y_max.to_double() - spec.bounds.y_min.to_double();
            const auto raw_units = [&](FitMetrics m) {
                m.mse *= y_range * y_range;
                m.mae *= y_range;
                m.slope_se *= y_range / x_range;
                m.intercept_se *= y_range;
                return m;
            };
            const FitMetrics ols_m = raw_units(metrics(plain, dataset.samples));
            const FitMetrics dp_m =
                raw_units(metrics(receipt.journal.result, dataset.samples));
            const auto push = [&](const char* name, double a, double b) {
                report.accuracy.push_back(
                    BenchAccuracyRow{name, a, b, std::abs(a - b)});
            };
            push("slope_se", ols_m.slope_se, dp_m.slope_se);
            push("intercept_se", ols_m.intercept_se, dp_m.intercept_se);
            push("mae", ols_m.mae, dp_m.mae);
        }
    }
    return report;
}

std::string bench_timing_csv(const BenchReport& report) {
    std::string out = "size,backend,batch_size,prove_ms,verify_ms\n";
    for (const BenchTimingRow& row : report.timing) {
        out += std::to_string(row.size);
        out += ',' + row.backend;
        out += ',' + std::to_string(row.batch_size);
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%.3f,%.3f\n", row.prove_ms, row.verify_ms);
        out += buf;
    }
    return out;
}

std::string bench_accuracy_csv(const BenchReport& report) {
    std::string out = "metric,ols,dp,delta\n";
    for (const BenchAccuracyRow& row : report.accuracy) {
        out += row.metric;
        out += ',' + format_double(row.ols);
        out += ',' + format_double(row.dp);
        out += ',' + format_double(row.delta);
        out += '\n';
    }
    return out;
}

}  // namespace adpr
