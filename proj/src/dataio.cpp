#include "adpr/dataio.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "adpr/bytes.hpp"
#include "adpr/noise.hpp"

namespace adpr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (const char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.pop_back();
    }
    std::size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) {
        ++start;
    }
    return s.substr(start);
}

// Format with six decimals such that the parsed-back value still lies in
// [lo, hi]; rounding at the edges is nudged inward one step at a time.
std::string format_in_bounds(double v, FixedQ lo, FixedQ hi) {
    char buf[64];
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        const FixedQ parsed = FixedQ::from_decimal(buf);
        if (parsed < lo) {
            v += 1e-6;
        } else if (parsed > hi) {
            v -= 1e-6;
        } else {
            return buf;
        }
    }
    throw DomainError("gen_synthetic: bounds too narrow for 6-decimal grid");
}

}  // namespace

FixedQ normalize_component(FixedQ value, FixedQ lo, FixedQ hi) {
    return (value - lo) / (hi - lo);
}

Dataset load_csv(const std::filesystem::path& path, std::string_view x_column,
                 std::string_view y_column, const NormBounds& bounds) {
    bounds.validate();
    std::ifstream in(path);
    if (!in) {
        throw IngestError(0, "cannot open '" + path.string() + "'");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw EmptyInput("csv: empty file '" + path.string() + "'");
    }
    if (line.size() >= 3 && line[0] == '\xef' && line[1] == '\xbb' && line[2] == '\xbf') {
        line.erase(0, 3);  // UTF-8 BOM
    }

    const auto header = split_csv_line(line);
    std::size_t x_idx = header.size(), y_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = trim(header[i]);
        if (name == x_column) x_idx = i;
        if (name == y_column) y_idx = i;
    }
    if (x_idx == header.size()) {
        throw IngestError(0, "csv: missing column '" + std::string(x_column) + "'");
    }
    if (y_idx == header.size()) {
        throw IngestError(0, "csv: missing column '" + std::string(y_column) + "'");
    }

    Dataset dataset;
    dataset.bounds = bounds;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw IngestError(row, "csv: expected " + std::to_string(header.size()) +
                                       " cells, got " + std::to_string(cells.size()));
        }
        FixedQ x_raw, y_raw;
        try {
            x_raw = FixedQ::from_decimal(trim(cells[x_idx]));
            y_raw = FixedQ::from_decimal(trim(cells[y_idx]));
        } catch (const Error& e) {
            throw IngestError(row, std::string("csv: ") + e.what());
        }
        if (!bounds.contains_raw(x_raw, y_raw)) {
            throw IngestError(row, "csv: value outside normalization bounds");
        }
        dataset.samples.push_back(SamplePair{
            normalize_component(x_raw, bounds.x_min, bounds.x_max),
            normalize_component(y_raw, bounds.y_min, bounds.y_max)});
    }
    if (dataset.samples.empty()) {
        throw EmptyInput("csv: no data rows in '" + path.string() + "'");
    }
    return dataset;
}

std::vector<std::uint8_t> pack_blob(const Dataset& dataset) {
    if (dataset.samples.empty()) {
        throw EmptyInput("pack_blob: empty dataset");
    }
    dataset.bounds.validate();
    ByteWriter w;
    w.ascii(kBlobMagic);
    w.u16(kBlobVersion);
    w.u64(dataset.n());
    w.i64(dataset.bounds.x_min.raw());
    w.i64(dataset.bounds.x_max.raw());
    w.i64(dataset.bounds.y_min.raw());
    w.i64(dataset.bounds.y_max.raw());
    for (const SamplePair& s : dataset.samples) {
        w.i64(s.x.raw());
        w.i64(s.y.raw());
    }
    const Digest32 digest = sha256(w.view());
    w.bytes(digest);
    return w.take();
}

DatasetBlob load_blob(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t kHeaderSize = 8 + 2 + 8 + 4 * 8;
    if (bytes.size() < kHeaderSize + 32) {
        throw BlobFormatError("blob: truncated");
    }
    if (std::memcmp(bytes.data(), kBlobMagic.data(), kBlobMagic.size()) != 0) {
        throw BlobFormatError("blob: bad magic");
    }
    ByteReader header(bytes.subspan(kBlobMagic.size()));
    const std::uint16_t version = header.u16();
    if (version != kBlobVersion) {
        throw BlobFormatError("blob: unsupported version " + std::to_string(version));
    }
    const std::uint64_t count = header.u64();
    if (count == 0) {
        throw BlobFormatError("blob: zero records");
    }
    // count is attacker-controlled; divide instead of multiplying so the
    // size check cannot be bypassed by overflow.
    if (count > (bytes.size() - kHeaderSize - 32) / 16 ||
        bytes.size() != kHeaderSize + count * 16 + 32) {
        throw BlobFormatError("blob: size mismatch");
    }

    const std::size_t body = bytes.size() - 32;
    const Digest32 digest = sha256(bytes.first(body));
    if (std::memcmp(digest.data(), bytes.data() + body, 32) != 0) {
        throw BlobFormatError("blob: digest mismatch");
    }

    DatasetBlob out;
    out.digest = digest;
    out.dataset.bounds.x_min = FixedQ::from_raw(header.i64());
    out.dataset.bounds.x_max = FixedQ::from_raw(header.i64());
    out.dataset.bounds.y_min = FixedQ::from_raw(header.i64());
    out.dataset.bounds.y_max = FixedQ::from_raw(header.i64());

    // Zero-parse path: the payload is already the in-memory record layout,
    // so it is reinterpreted in one bulk copy. No per-record work.
    static_assert(sizeof(SamplePair) == 16);
    out.dataset.samples.resize(count);
    std::memcpy(out.dataset.samples.data(), bytes.data() + kHeaderSize,
                count * sizeof(SamplePair));
    return out;
}

DatasetBlob load_blob_file(const std::filesystem::path& path) {
    return load_blob(read_file(path));
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("short write to '" + path.string() + "'");
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) {
        throw Error("short read from '" + path.string() + "'");
    }
    return bytes;
}

Dataset gen_synthetic(const SyntheticSpec& spec,
                      const std::optional<std::filesystem::path>& csv_out) {
    if (spec.n == 0) {
        throw EmptyInput("gen_synthetic: n must be at least 1");
    }
    spec.bounds.validate();

    // Deterministic generator keyed off the integer seed through the same
    // counter-hash stream the noise module uses.
    ByteWriter seed_msg;
    seed_msg.ascii("adpr.gen.v1");
    seed_msg.u64(spec.seed);
    NoiseStream stream{sha256(seed_msg.view()), 0};
    const auto uniform = [&stream]() {
        ByteWriter msg;
        msg.bytes(stream.seed);
        msg.u64(stream.counter);
        const Digest32 d = sha256(msg.view());
        stream.counter += 1;
        return static_cast<double>(load_u64le(d.data())) / 18446744073709551616.0;
    };

    const double x_lo = spec.bounds.x_min.to_double();
    const double x_hi = spec.bounds.x_max.to_double();
    const double y_lo = spec.bounds.y_min.to_double();
    const double y_hi = spec.bounds.y_max.to_double();

    std::string csv;
    csv.reserve(spec.n * 24 + 8);
    csv += "x,y\n";
    for (std::uint64_t i = 0; i < spec.n; ++i) {
        const double x = x_lo + uniform() * (x_hi - x_lo);
        // Box-Muller; two fresh uniforms per sample keep the draw count a
        // pure function of i.
        const double u1 = std::max(uniform(), 1e-18);
        const double u2 = uniform();
        const double gauss =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        double y = spec.slope * x + spec.intercept + gauss * spec.noise_sd;
        y = std::min(std::max(y, y_lo), y_hi);
        csv += format_in_bounds(x, spec.bounds.x_min, spec.bounds.x_max);
        csv += ',';
        csv += format_in_bounds(y, spec.bounds.y_min, spec.bounds.y_max);
        csv += '\n';
    }

    if (csv_out) {
        std::ofstream out(*csv_out, std::ios::binary);
        if (!out) {
            throw Error("cannot open '" + csv_out->string() + "' for writing");
        }
        out << csv;
    }

    // Round-trip the text through the CSV loader so the returned dataset is
    // bit-identical to loading the emitted file.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    Dataset dataset;
    dataset.bounds = spec.bounds;
    dataset.samples.reserve(spec.n);
    while (std::getline(lines, line)) {
        const auto cells = split_csv_line(line);
        const FixedQ x_raw = FixedQ::from_decimal(cells[0]);
        const FixedQ y_raw = FixedQ::from_decimal(cells[1]);
        dataset.samples.push_back(SamplePair{
            normalize_component(x_raw, dataset.bounds.x_min, dataset.bounds.x_max),
            normalize_component(y_raw, dataset.bounds.y_min, dataset.bounds.y_max)});
    }
    return dataset;
}

}  // namespace adpr
