#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "adpr/dataio.hpp"
#include "adpr/hash.hpp"
#include "adpr/merkle.hpp"
#include "adpr/regression.hpp"

namespace adpr {

/// One semantic step of the guest: the accumulator snapshot after ingesting
/// sample i. rng_counter is zero on every ingestion record and carries the
/// total number of noise draws on the single finalization record.
struct TraceRecord {
    std::uint64_t index = 0;
    Accumulators acc;
    std::uint64_t rng_counter = 0;

    bool operator==(const TraceRecord&) const = default;
};

/// Fixed-width little-endian encoding: index, n, the four sums, rng_counter.
std::array<std::uint8_t, 56> serialize_record(const TraceRecord& record);
TraceRecord deserialize_record(std::span<const std::uint8_t> bytes);

/// The public instance of a guest run: everything the verifier needs to
/// know what was computed, over which data, with which parameters, and
/// what came out (including the bottom outcome).
struct Journal {
    Digest32 program_digest{};
    Digest32 dataset_digest{};
    NormBounds bounds{};
    FixedQ eps;
    std::array<std::uint8_t, 32> seed{};
    std::uint64_t n = 0;
    LinearModel result;
    std::uint64_t final_rng_counter = 0;

    bool operator==(const Journal&) const = default;
};

/// Canonical digest preimage: magic "ADPRCPT1", version u16, then the
/// fields in declared order, little-endian. This byte layout is normative
/// for interoperating implementations.
std::vector<std::uint8_t> serialize_journal(const Journal& journal);
Digest32 journal_digest(const Journal& journal);

inline constexpr std::string_view kReceiptMagic = "ADPRCPT1";
inline constexpr std::uint16_t kReceiptVersion = 1;

/// Digest identifying the guest logic revision and parameter layout the
/// verifier expects.
Digest32 program_digest();

/// One opened trace position: the record, its authentication path, and,
/// for every index above zero, the predecessor record and path so the
/// local transition can be checked.
struct Opening {
    std::uint64_t index = 0;
    TraceRecord record;
    std::vector<Digest32> path;
    TraceRecord prev_record;
    std::vector<Digest32> prev_path;

    bool operator==(const Opening&) const = default;
};

/// The attestation artifact. `openings` holds the k Fiat-Shamir-sampled
/// positions (k = max(1, ceil(log2(trace_len))), duplicates kept); the
/// finalization record is additionally always opened so the journal result
/// can be recomputed unconditionally.
struct Receipt {
    Journal journal;
    Digest32 journal_digest{};
    Digest32 trace_root{};
    std::uint64_t trace_len = 0;
    std::vector<Opening> openings;
    Opening final_opening;

    bool operator==(const Receipt&) const = default;
};

/// Number of sampled queries for a trace of m records.
std::uint64_t query_count(std::uint64_t m);

/// Fiat-Shamir challenge index j: first 64 bits (little-endian) of
/// SHA-256(trace_root || journal_digest || j) reduced mod m.
std::uint64_t fs_index(const Digest32& trace_root, const Digest32& jd,
                       std::uint64_t j, std::uint64_t m);

struct GuestRun {
    Journal journal;
    std::vector<TraceRecord> trace;
};

/// Deterministic guest execution: ingest every blob record in order (one
/// trace record each), run the noisy fit, append one finalization record.
/// Arithmetic overflow propagates and no receipt is produced.
GuestRun execute_guest(const DatasetBlob& blob, const PrivacyParams& params);

struct VerifyResult {
    bool ok = false;
    std::string reason;  // stable machine-readable token when rejected
    std::string detail;

    explicit operator bool() const { return ok; }

    static VerifyResult accept() { return VerifyResult{true, "", ""}; }
    static VerifyResult reject(std::string reason, std::string detail) {
        return VerifyResult{false, std::move(reason), std::move(detail)};
    }
};

/// Attestation backends turn guest executions into receipts and check
/// receipts against the commissioned blob. The transcript-commitment
/// backend is the sole shipped implementation; a real ZKVM would register
/// here behind the same contract.
class AttestationBackend {
public:
    virtual ~AttestationBackend() = default;
    virtual std::string_view id() const noexcept = 0;
    virtual Receipt prove(const DatasetBlob& blob,
                          const PrivacyParams& params) const = 0;
    virtual VerifyResult verify(const Receipt& receipt,
                                const DatasetBlob& blob) const = 0;
};

inline constexpr std::string_view kDefaultBackendId = "transcript-v1";

/// Look up a registered backend; unknown names raise ConfigError.
const AttestationBackend& attestation_backend(
    std::string_view id = kDefaultBackendId);
std::vector<std::string_view> attestation_backend_ids();
void register_attestation_backend(std::unique_ptr<AttestationBackend> backend);

/// prove/verify on the default backend.
Receipt prove(const DatasetBlob& blob, const PrivacyParams& params);
VerifyResult verify(const Receipt& receipt, const DatasetBlob& blob);

}  // namespace adpr
