#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <thread>

#include "adpr/pipeline.hpp"
#include "adpr/receipt_io.hpp"

using namespace adpr;

namespace {

PrivacyParams test_params(std::uint8_t fill = 1) {
    PrivacyParams params;
    params.eps = FixedQ::from_int(2);
    params.seed.fill(fill);
    return params;
}

Dataset small_dataset(std::uint64_t n, std::uint64_t seed = 5,
                      double noise_sd = 4.0) {
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.slope = 0.6;
    spec.intercept = 20.0;
    spec.noise_sd = noise_sd;
    spec.bounds = NormBounds{FixedQ::from_int(0), FixedQ::from_int(100),
                             FixedQ::from_int(0), FixedQ::from_int(100)};
    return gen_synthetic(spec);
}

}  // namespace

TEST_CASE("batch plans partition the dataset") {
    const BatchPlan full = plan_batches(50000, 1400);
    CHECK(full.batches.size() == 36);
    CHECK(full.batches.front().length == 1400);
    CHECK(full.batches.back().length == 1000);
    std::uint64_t expected_offset = 0;
    for (const Batch& batch : full.batches) {
        CHECK(batch.offset == expected_offset);
        expected_offset += batch.length;
    }
    CHECK(expected_offset == 50000);

    CHECK(plan_batches(5, 10).batches == std::vector<Batch>{Batch{0, 5}});
    CHECK(plan_batches(1400, 1400).batches.size() == 1);
    CHECK_THROWS_AS(plan_batches(0, 10), EmptyInput);
    CHECK_THROWS_AS(plan_batches(10, 0), DomainError);
}

TEST_CASE("batch seeds are pure functions of (root, index)") {
    const auto root = test_params(3).seed;
    CHECK(derive_batch_seed(root, 0) == derive_batch_seed(root, 0));
    CHECK(derive_batch_seed(root, 0) != derive_batch_seed(root, 1));
    CHECK(derive_batch_seed(root, 1) != derive_batch_seed(test_params(4).seed, 1));
}

TEST_CASE("prove_all proves every batch and each receipt verifies") {
    const Dataset dataset = small_dataset(130);
    const BatchPlan plan = plan_batches(dataset.n(), 40);
    const PrivacyParams params = test_params();
    const auto outcomes = prove_all(dataset, params, plan, 2);
    REQUIRE(outcomes.size() == 4);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const BatchOutcome& outcome = outcomes[i];
        CHECK(outcome.index == i);
        CHECK(outcome.error.empty());
        REQUIRE(outcome.receipt.has_value());
        const DatasetBlob blob = load_blob(outcome.blob_bytes);
        CHECK(blob.dataset.n() == plan.batches[i].length);
        CHECK(verify(*outcome.receipt, blob).ok);
        CHECK(outcome.receipt->journal.seed == derive_batch_seed(params.seed, i));
    }
}

TEST_CASE("scheduling does not leak into receipts") {
    const Dataset dataset = small_dataset(90);
    const BatchPlan plan = plan_batches(dataset.n(), 30);
    const PrivacyParams params = test_params(7);
    const auto serial = prove_all(dataset, params, plan, 1);
    const auto parallel = prove_all(dataset, params, plan, 3);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(receipt_to_json(*serial[i].receipt) ==
              receipt_to_json(*parallel[i].receipt));
    }

    // Re-proving one batch in isolation reproduces the pooled receipt.
    const Batch& batch = plan.batches[2];
    Dataset slice;
    slice.bounds = dataset.bounds;
    slice.samples.assign(dataset.samples.begin() + batch.offset,
                         dataset.samples.begin() + batch.offset + batch.length);
    const DatasetBlob blob = load_blob(pack_blob(slice));
    const Receipt alone =
        prove(blob, PrivacyParams{params.eps, derive_batch_seed(params.seed, 2)});
    CHECK(receipt_to_json(alone) == receipt_to_json(*serial[2].receipt));
}

TEST_CASE("a single-batch plan reduces to a direct prove") {
    const Dataset dataset = small_dataset(64);
    const PrivacyParams params = test_params(5);
    const auto outcomes =
        prove_all(dataset, params, plan_batches(dataset.n(), 1400), 1);
    REQUIRE(outcomes.size() == 1);

    const DatasetBlob blob = load_blob(pack_blob(dataset));
    const Receipt direct =
        prove(blob, PrivacyParams{params.eps, derive_batch_seed(params.seed, 0)});
    CHECK(receipt_to_json(*outcomes[0].receipt) == receipt_to_json(direct));
    CHECK(outcomes[0].blob_bytes == pack_blob(dataset));
}

TEST_CASE("aggregation skips bottom batches with a count") {
    const Dataset dataset = small_dataset(120);
    const BatchPlan plan = plan_batches(dataset.n(), 40);
    auto outcomes = prove_all(dataset, test_params(2), plan, 1);
    REQUIRE(outcomes.size() == 3);

    const AggregateOutcome all = aggregate_outcomes(outcomes);
    CHECK(all.used == 3);
    CHECK(all.skipped_bottom == 0);

    // Exact mean oracle over the three journal models.
    __int128 slope_sum = 0, intercept_sum = 0;
    for (const auto& outcome : outcomes) {
        slope_sum += outcome.receipt->journal.result.slope.raw();
        intercept_sum += outcome.receipt->journal.result.intercept.raw();
    }
    CHECK(static_cast<__int128>(all.model.slope.raw()) == slope_sum / 3);
    CHECK(static_cast<__int128>(all.model.intercept.raw()) == intercept_sum / 3);

    outcomes[1].receipt->journal.result.failed = true;
    const AggregateOutcome partial = aggregate_outcomes(outcomes);
    CHECK(partial.used == 2);
    CHECK(partial.skipped_bottom == 1);

    outcomes[0].receipt->journal.result.failed = true;
    outcomes[2].receipt->journal.result.failed = true;
    CHECK_THROWS_AS(aggregate_outcomes(outcomes), EmptyInput);

    outcomes[0].error = "overflow";
    outcomes[0].receipt.reset();
    CHECK_THROWS_AS(aggregate_outcomes(outcomes), Error);
}

TEST_CASE("progression over collinear data keeps a constant slope") {
    const Dataset dataset = small_dataset(200, 9, 0.0);
    const BatchPlan plan = plan_batches(dataset.n(), 25);
    const auto rows = progression_report(dataset, test_params(), plan);
    REQUIRE(rows.size() == plan.batches.size());
    for (std::size_t b = 0; b < rows.size(); ++b) {
        CHECK(rows[b].batch == b);
        CHECK(rows[b].slope == doctest::Approx(0.6).epsilon(1e-5));
        CHECK(rows[b].batch_mean_x >= 0.0);
        CHECK(rows[b].batch_mean_x <= 100.0);
    }

    // The cumulative fit after the last batch is the whole-dataset fit.
    Accumulators acc;
    for (const SamplePair& s : dataset.samples) {
        acc = ingest(acc, s);
    }
    const LinearModel full = denormalize(ols_fit(acc), dataset.bounds);
    CHECK(std::abs(rows.back().slope - full.slope.to_double()) < 1e-6);
    CHECK(std::abs(rows.back().intercept - full.intercept.to_double()) < 1e-6);

    const std::string csv = progression_to_csv(rows);
    CHECK(csv.rfind("iteration,x_mean,y_mean,slope,intercept,noisy_intercept\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          static_cast<std::ptrdiff_t>(rows.size() + 1));
}

TEST_CASE("bench produces one timing row per size and table-shaped accuracy") {
    const std::vector<std::uint64_t> sizes{100};
    const BenchReport report = run_bench(sizes, test_params(), kDefaultBackendId, 3);
    REQUIRE(report.timing.size() == 1);
    CHECK(report.timing[0].size == 100);
    CHECK(report.timing[0].backend == kDefaultBackendId);
    CHECK(report.timing[0].prove_ms > 0.0);
    CHECK(report.timing[0].verify_ms > 0.0);
    REQUIRE(report.accuracy.size() == 3);
    CHECK(report.accuracy[0].metric == "slope_se");
    CHECK(report.accuracy[1].metric == "intercept_se");
    CHECK(report.accuracy[2].metric == "mae");

    CHECK(bench_timing_csv(report).rfind(
              "size,backend,batch_size,prove_ms,verify_ms\n", 0) == 0);
    CHECK(bench_accuracy_csv(report).rfind("metric,ols,dp,delta\n", 0) == 0);

    CHECK_THROWS_AS(run_bench({}, test_params()), EmptyInput);
}

TEST_CASE("worker pools spread proving across cores") {
    if (std::thread::hardware_concurrency() < 4) {
        MESSAGE("skipped: needs at least 4 cores, have ",
                std::thread::hardware_concurrency());
        return;
    }
    const Dataset dataset = small_dataset(50000 / 10, 13);
    const BatchPlan plan = plan_batches(dataset.n(), dataset.n() / 36 + 1);
    const PrivacyParams params = test_params();

    const auto timed = [&](unsigned workers) {
        const auto start = std::chrono::steady_clock::now();
        const auto outcomes = prove_all(dataset, params, plan, workers);
        const auto stop = std::chrono::steady_clock::now();
        for (const auto& outcome : outcomes) {
            REQUIRE(outcome.error.empty());
        }
        return std::chrono::duration<double>(stop - start).count();
    };
    const double serial = timed(1);
    const double pooled = timed(4);
    CHECK(pooled <= 0.35 * serial);
}
