#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "adpr/hash.hpp"
#include "adpr/regression.hpp"

namespace adpr {

/// Normalized samples plus the bounds they were normalized with.
struct Dataset {
    std::vector<SamplePair> samples;
    NormBounds bounds{};

    std::uint64_t n() const { return samples.size(); }

    bool operator==(const Dataset&) const = default;
};

/// (value - lo) / (hi - lo), each step one deterministic FixedQ op.
/// Maps lo to exactly 0 and hi to exactly 1 and is monotone in between.
FixedQ normalize_component(FixedQ value, FixedQ lo, FixedQ hi);

/// Load a header-ed, comma-separated, UTF-8 file with period decimals.
/// Cells are parsed as exact decimals; rows outside the bounds, unparseable
/// cells and missing columns raise IngestError naming the row. A file with
/// no data rows raises EmptyInput.
Dataset load_csv(const std::filesystem::path& path, std::string_view x_column,
                 std::string_view y_column, const NormBounds& bounds);

// Blob layout, little-endian throughout:
//   magic "ADPR0001" | version u16 | count u64 | bounds 4 x i64 raw |
//   payload count x (x,y) i64 raw pairs | SHA-256 of all preceding bytes.
inline constexpr std::string_view kBlobMagic = "ADPR0001";
inline constexpr std::uint16_t kBlobVersion = 1;

/// Serialize a non-empty dataset into the embedded-bytes blob format.
std::vector<std::uint8_t> pack_blob(const Dataset& dataset);

/// A loaded blob: the dataset plus the trailer digest that identifies it in
/// journals. The digest was recomputed and checked at load time.
struct DatasetBlob {
    Dataset dataset;
    Digest32 digest{};
};

/// Zero-parse load: after the single digest pass over the buffer, records
/// are reinterpreted in place from the contiguous payload with no
/// per-record parsing or validation.
DatasetBlob load_blob(std::span<const std::uint8_t> bytes);

DatasetBlob load_blob_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Synthetic linear-plus-noise generator standing in for an external
/// (x, y) table: x uniform over the x-range, y = slope*x + intercept +
/// N(0, noise_sd), clamped into bounds. Deterministic in seed.
struct SyntheticSpec {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double slope = 0.0;       // raw units
    double intercept = 0.0;   // raw units
    double noise_sd = 0.0;    // raw units
    NormBounds bounds{};
};

/// Generate the dataset; when csv_out is given, also write it as CSV with
/// header "x,y". The returned dataset is byte-identical to load_csv of the
/// emitted file because both paths go through the same decimal parse.
Dataset gen_synthetic(const SyntheticSpec& spec,
                      const std::optional<std::filesystem::path>& csv_out = {});

}  // namespace adpr
