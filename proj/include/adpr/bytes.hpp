#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include "adpr/errors.hpp"

namespace adpr {

/// Little-endian byte-stream writer for the canonical wire formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

    void bytes(std::span<const std::uint8_t> b) {
        buf_.insert(buf_.end(), b.begin(), b.end());
    }

    void ascii(std::string_view s) {
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    std::span<const std::uint8_t> view() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Little-endian reader; throws BlobFormatError on underrun.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }

    std::uint16_t u16() {
        const auto b = take(2);
        return static_cast<std::uint16_t>(b[0]) |
               static_cast<std::uint16_t>(b[1]) << 8;
    }

    std::uint64_t u64() {
        const auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        }
        return v;
    }

    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    std::span<const std::uint8_t> take(std::size_t count) {
        if (count > data_.size() - pos_) {
            throw BlobFormatError("byte stream truncated");
        }
        const auto out = data_.subspan(pos_, count);
        pos_ += count;
        return out;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

inline std::uint64_t load_u64le(const std::uint8_t* p) {
    std::uint64_t v;
    std::memcpy(&v, p, sizeof v);
    // All supported targets are little-endian; the wire format is too.
    static_assert(std::endian::native == std::endian::little);
    return v;
}

}  // namespace adpr
