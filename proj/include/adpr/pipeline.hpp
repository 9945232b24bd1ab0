#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adpr/attest.hpp"
#include "adpr/dataio.hpp"

namespace adpr {

struct Batch {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    bool operator==(const Batch&) const = default;
};

/// Contiguous partition of [0, n): every batch except possibly the last has
/// length batch_size, lengths sum to n, order follows the dataset.
struct BatchPlan {
    std::uint64_t batch_size = 0;
    std::vector<Batch> batches;
};

BatchPlan plan_batches(std::uint64_t n, std::uint64_t batch_size);

/// Batch i's noise seed: SHA-256(root_seed || i). Re-proving one batch can
/// never perturb another's model.
std::array<std::uint8_t, 32> derive_batch_seed(
    const std::array<std::uint8_t, 32>& root_seed, std::uint64_t index);

/// Outcome of proving one batch. `error` is non-empty only for hard
/// failures (overflow aborts); a bottom model is a *valid* receipt whose
/// journal carries the failure flag.
struct BatchOutcome {
    std::uint64_t index = 0;
    std::vector<std::uint8_t> blob_bytes;
    std::optional<Receipt> receipt;
    std::string error;

    bool bottom() const {
        return receipt.has_value() && receipt->journal.result.failed;
    }
};

/// Prove every batch of the plan with a pool of `parallelism` workers.
/// Each batch is packed as its own blob and proved under its derived seed;
/// outcomes are returned in batch order regardless of scheduling.
std::vector<BatchOutcome> prove_all(const Dataset& dataset,
                                    const PrivacyParams& params,
                                    const BatchPlan& plan, unsigned parallelism,
                                    std::string_view backend_id = kDefaultBackendId);

struct AggregateOutcome {
    LinearModel model;
    std::size_t used = 0;
    std::size_t skipped_bottom = 0;
};

/// Mean of the per-batch models, excluding bottom outcomes (callers surface
/// skipped_bottom as a warning). Hard batch failures raise; all-bottom
/// input raises EmptyInput.
AggregateOutcome aggregate_outcomes(std::span<const BatchOutcome> outcomes);

/// One row per batch: batch-local means plus cumulative fits over batches
/// 0..b, all reported in raw data units.
struct ProgressionRow {
    std::uint64_t batch = 0;
    double batch_mean_x = 0.0;
    double batch_mean_y = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double noisy_intercept = 0.0;
    bool noisy_failed = false;
};

std::vector<ProgressionRow> progression_report(const Dataset& dataset,
                                               const PrivacyParams& params,
                                               const BatchPlan& plan);

std::string progression_to_csv(std::span<const ProgressionRow> rows);

struct BenchTimingRow {
    std::uint64_t size = 0;
    std::string backend;
    std::uint64_t batch_size = 0;
    double prove_ms = 0.0;
    double verify_ms = 0.0;
};

struct BenchAccuracyRow {
    std::string metric;
    double ols = 0.0;
    double dp = 0.0;
    double delta = 0.0;
};

struct BenchReport {
    std::vector<BenchTimingRow> timing;
    std::vector<BenchAccuracyRow> accuracy;
};

/// Time prove/verify per dataset size (wall-clock median over
/// `repetitions` >= 3 runs each, whole dataset as one batch) and compare
/// plain vs noisy model accuracy on the largest size.
BenchReport run_bench(std::span<const std::uint64_t> sizes,
                      const PrivacyParams& params,
                      std::string_view backend_id = kDefaultBackendId,
                      int repetitions = 5);

/// CSV headers: "size,backend,batch_size,prove_ms,verify_ms" and
/// "metric,ols,dp,delta".
std::string bench_timing_csv(const BenchReport& report);
std::string bench_accuracy_csv(const BenchReport& report);

}  // namespace adpr
