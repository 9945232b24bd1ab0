#include "adpr/attest.hpp"

#include <map>
#include <mutex>

#include "adpr/bytes.hpp"

namespace adpr {

namespace {

// Bumping this string invalidates every outstanding receipt, which is the
// point: it names the guest semantics a verifier agreed to.
constexpr std::string_view kGuestVersion =
    "adpr.guest.v1|q31.32|noisystats|record56|journal1";

}  // namespace

Digest32 program_digest() {
    static const Digest32 digest = sha256(kGuestVersion);
    return digest;
}

std::array<std::uint8_t, 56> serialize_record(const TraceRecord& record) {
    ByteWriter w;
    w.u64(record.index);
    w.u64(record.acc.n);
    w.i64(record.acc.sum_x.raw());
    w.i64(record.acc.sum_y.raw());
    w.i64(record.acc.sum_xx.raw());
    w.i64(record.acc.sum_xy.raw());
    w.u64(record.rng_counter);
    std::array<std::uint8_t, 56> out;
    const auto bytes = w.view();
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

TraceRecord deserialize_record(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != 56) {
        throw BlobFormatError("trace record: expected 56 bytes");
    }
    ByteReader r(bytes);
    TraceRecord record;
    record.index = r.u64();
    record.acc.n = r.u64();
    record.acc.sum_x = FixedQ::from_raw(r.i64());
    record.acc.sum_y = FixedQ::from_raw(r.i64());
    record.acc.sum_xx = FixedQ::from_raw(r.i64());
    record.acc.sum_xy = FixedQ::from_raw(r.i64());
    record.rng_counter = r.u64();
    return record;
}

std::vector<std::uint8_t> serialize_journal(const Journal& journal) {
    ByteWriter w;
    w.ascii(kReceiptMagic);
    w.u16(kReceiptVersion);
    w.bytes(journal.program_digest);
    w.bytes(journal.dataset_digest);
    w.i64(journal.bounds.x_min.raw());
    w.i64(journal.bounds.x_max.raw());
    w.i64(journal.bounds.y_min.raw());
    w.i64(journal.bounds.y_max.raw());
    w.i64(journal.eps.raw());
    w.bytes(journal.seed);
    w.u64(journal.n);
    w.u8(journal.result.noisy ? 1 : 0);
    w.u8(journal.result.failed ? 1 : 0);
    w.i64(journal.result.slope.raw());
    w.i64(journal.result.intercept.raw());
    w.u64(journal.final_rng_counter);
    return w.take();
}

Digest32 journal_digest(const Journal& journal) {
    return sha256(serialize_journal(journal));
}

std::uint64_t query_count(std::uint64_t m) {
    if (m == 0) {
        throw DomainError("query_count: empty trace");
    }
    const std::size_t k = ceil_log2(m);
    return k == 0 ? 1 : static_cast<std::uint64_t>(k);
}

std::uint64_t fs_index(const Digest32& trace_root, const Digest32& jd,
                       std::uint64_t j, std::uint64_t m) {
    ByteWriter w;
    w.bytes(trace_root);
    w.bytes(jd);
    w.u64(j);
    const Digest32 digest = sha256(w.view());
    return load_u64le(digest.data()) % m;
}

GuestRun execute_guest(const DatasetBlob& blob, const PrivacyParams& params) {
    if (params.eps <= fq_zero) {
        throw DomainError("guest: eps must be positive");
    }
    const std::uint64_t n = blob.dataset.n();
    GuestRun run;
    run.trace.reserve(n + 1);

    Accumulators acc;
    for (std::uint64_t i = 0; i < n; ++i) {
        acc = ingest(acc, blob.dataset.samples[i]);
        run.trace.push_back(TraceRecord{i, acc, 0});
    }

    NoiseStream stream{params.seed, 0};
    const LinearModel result = noisystats_fit(acc, params, stream);
    run.trace.push_back(TraceRecord{n, acc, stream.counter});

    run.journal.program_digest = program_digest();
    run.journal.dataset_digest = blob.digest;
    run.journal.bounds = blob.dataset.bounds;
    run.journal.eps = params.eps;
    run.journal.seed = params.seed;
    run.journal.n = n;
    run.journal.result = result;
    run.journal.final_rng_counter = stream.counter;
    return run;
}

namespace {

class TranscriptBackend final : public AttestationBackend {
public:
    std::string_view id() const noexcept override { return kDefaultBackendId; }

    Receipt prove(const DatasetBlob& blob,
                  const PrivacyParams& params) const override {
        GuestRun run = execute_guest(blob, params);
        const std::uint64_t m = run.trace.size();

        std::vector<Digest32> leaves;
        leaves.reserve(m);
        for (const TraceRecord& record : run.trace) {
            leaves.push_back(sha256(serialize_record(record)));
        }
        const MerkleTree tree(std::move(leaves));

        Receipt receipt;
        receipt.journal = run.journal;
        receipt.journal_digest = journal_digest(run.journal);
        receipt.trace_root = tree.root();
        receipt.trace_len = m;

        const auto open_at = [&](std::uint64_t index) {
            Opening opening;
            opening.index = index;
            opening.record = run.trace[index];
            opening.path = tree.path(index);
            if (index > 0) {
                opening.prev_record = run.trace[index - 1];
                opening.prev_path = tree.path(index - 1);
            }
            return opening;
        };

        const std::uint64_t k = query_count(m);
        receipt.openings.reserve(k);
        for (std::uint64_t j = 0; j < k; ++j) {
            receipt.openings.push_back(
                open_at(fs_index(receipt.trace_root, receipt.journal_digest, j, m)));
        }
        receipt.final_opening = open_at(m - 1);
        return receipt;
    }

    VerifyResult verify(const Receipt& receipt,
                        const DatasetBlob& blob) const override {
        using VR = VerifyResult;
        const Journal& journal = receipt.journal;

        // (1) The journal must hash to the digest every challenge was
        // derived from.
        if (journal_digest(journal) != receipt.journal_digest) {
            return VR::reject("journal-digest", "journal bytes do not match digest");
        }
        // (2) Guest identity.
        if (journal.program_digest != program_digest()) {
            return VR::reject("program-digest", "unexpected guest program digest");
        }
        // (3) Binding to the commissioned blob.
        if (journal.dataset_digest != blob.digest) {
            return VR::reject("dataset-digest", "journal is for a different blob");
        }
        if (journal.bounds != blob.dataset.bounds) {
            return VR::reject("dataset-bounds", "journal bounds differ from blob");
        }
        if (journal.n != blob.dataset.n()) {
            return VR::reject("dataset-count", "journal n differs from blob");
        }
        if (receipt.trace_len != journal.n + 1) {
            return VR::reject("trace-length", "trace length must be n + 1");
        }
        const std::uint64_t m = receipt.trace_len;

        // (4) Challenge indices are a pure function of root and journal.
        if (receipt.openings.size() != query_count(m)) {
            return VR::reject("query-count", "wrong number of sampled openings");
        }
        for (std::uint64_t j = 0; j < receipt.openings.size(); ++j) {
            if (receipt.openings[j].index !=
                fs_index(receipt.trace_root, receipt.journal_digest, j, m)) {
                return VR::reject("challenge-indices",
                                  "opening " + std::to_string(j) +
                                      " is not at the derived index");
            }
        }
        if (receipt.final_opening.index != m - 1) {
            return VR::reject("receipt-format", "final opening must be at m-1");
        }

        // (5) Every opened record authenticates against the root, and
        // (6) every opened transition is locally valid.
        for (const Opening& opening : receipt.openings) {
            if (auto r = check_opening(opening, journal, blob, receipt); !r.ok) {
                return r;
            }
        }
        if (auto r = check_opening(receipt.final_opening, journal, blob, receipt);
            !r.ok) {
            return r;
        }

        // (7) The journal result is recomputable in O(1) from the final
        // record plus the committed seed.
        const Accumulators& final_acc = receipt.final_opening.record.acc;
        NoiseStream stream{journal.seed, 0};
        LinearModel recomputed;
        try {
            recomputed = noisystats_fit(final_acc, {journal.eps, journal.seed},
                                        stream);
        } catch (const Error& e) {
            return VR::reject("result", std::string("finalization failed: ") + e.what());
        }
        if (recomputed != journal.result ||
            stream.counter != journal.final_rng_counter ||
            receipt.final_opening.record.rng_counter != journal.final_rng_counter) {
            return VR::reject("result", "journal result is not reproducible");
        }
        return VR::accept();
    }

private:
    static VerifyResult check_opening(const Opening& opening,
                                      const Journal& journal,
                                      const DatasetBlob& blob,
                                      const Receipt& receipt) {
        using VR = VerifyResult;
        const std::uint64_t i = opening.index;
        const std::uint64_t m = receipt.trace_len;
        const std::uint64_t n = journal.n;
        if (i >= m || opening.record.index != i) {
            return VR::reject("receipt-format", "opening index mismatch");
        }
        if (!MerkleTree::verify_path(sha256(serialize_record(opening.record)), i,
                                     m, opening.path, receipt.trace_root)) {
            return VR::reject("merkle-path",
                              "record " + std::to_string(i) + " fails its path");
        }
        if (i > 0) {
            if (opening.prev_record.index != i - 1) {
                return VR::reject("receipt-format", "neighbor index mismatch");
            }
            if (!MerkleTree::verify_path(
                    sha256(serialize_record(opening.prev_record)), i - 1, m,
                    opening.prev_path, receipt.trace_root)) {
                return VR::reject("merkle-path", "neighbor of record " +
                                                     std::to_string(i) +
                                                     " fails its path");
            }
        }

        const auto transition = [&](const char* what) {
            return VR::reject("transition", "record " + std::to_string(i) +
                                                ": " + what);
        };
        if (i < n) {
            // Ingestion step: acc_after = ingest(acc_before, sample_i).
            if (opening.record.rng_counter != 0) {
                return transition("ingestion record consumed noise");
            }
            const Accumulators before =
                i == 0 ? Accumulators{} : opening.prev_record.acc;
            if (i > 0 && opening.prev_record.rng_counter != 0) {
                return transition("predecessor consumed noise");
            }
            Accumulators expected;
            try {
                expected = ingest(before, blob.dataset.samples[i]);
            } catch (const Error& e) {
                return transition(e.what());
            }
            if (expected != opening.record.acc || opening.record.acc.n != i + 1) {
                return transition("accumulators do not extend predecessor");
            }
        } else {
            // Finalization step: accumulators unchanged, noise consumed.
            if (opening.prev_record.rng_counter != 0) {
                return transition("predecessor consumed noise");
            }
            if (opening.record.acc != opening.prev_record.acc) {
                return transition("finalization altered accumulators");
            }
        }
        return VR::accept();
    }
};

struct BackendRegistry {
    std::mutex mutex;
    std::vector<std::unique_ptr<AttestationBackend>> backends;

    BackendRegistry() {
        backends.push_back(std::make_unique<TranscriptBackend>());
    }
};

BackendRegistry& registry() {
    static BackendRegistry r;
    return r;
}

}  // namespace

const AttestationBackend& attestation_backend(std::string_view id) {
    auto& r = registry();
    const std::scoped_lock lock(r.mutex);
    for (const auto& backend : r.backends) {
        if (backend->id() == id) {
            return *backend;
        }
    }
    throw ConfigError("unknown attestation backend '" + std::string(id) + "'");
}

std::vector<std::string_view> attestation_backend_ids() {
    auto& r = registry();
    const std::scoped_lock lock(r.mutex);
    std::vector<std::string_view> ids;
    ids.reserve(r.backends.size());
    for (const auto& backend : r.backends) {
        ids.push_back(backend->id());
    }
    return ids;
}

void register_attestation_backend(std::unique_ptr<AttestationBackend> backend) {
    auto& r = registry();
    const std::scoped_lock lock(r.mutex);
    for (const auto& existing : r.backends) {
        if (existing->id() == backend->id()) {
            throw ConfigError("backend '" + std::string(backend->id()) +
                              "' already registered");
        }
    }
    r.backends.push_back(std::move(backend));
}

Receipt prove(const DatasetBlob& blob, const PrivacyParams& params) {
    return attestation_backend().prove(blob, params);
}

VerifyResult verify(const Receipt& receipt, const DatasetBlob& blob) {
    return attestation_backend().verify(receipt, blob);
}

}  // namespace adpr
