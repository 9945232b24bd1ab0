#include "adpr/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "adpr/errors.hpp"

namespace adpr {

namespace {

const EVP_MD* sha256_md() {
    static const EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
    return md;
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

namespace {

// Reused per-thread context: sha256 runs once per trace record and per
// Merkle node, so avoiding a context allocation matters. The holder frees
// the context when worker threads exit.
struct CtxHolder {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~CtxHolder() { EVP_MD_CTX_free(ctx); }
};

}  // namespace

Digest32 sha256(std::span<const std::uint8_t> data) {
    thread_local CtxHolder holder;
    Digest32 out{};
    unsigned int len = 0;
    if (EVP_DigestInit_ex(holder.ctx, sha256_md(), nullptr) != 1 ||
        EVP_DigestUpdate(holder.ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(holder.ctx, out.data(), &len) != 1 ||
        len != out.size()) {
        throw std::runtime_error("sha256: EVP failure");
    }
    return out;
}

Digest32 sha256(std::string_view text) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

Digest32 digest_from_hex(std::string_view hex) {
    if (hex.size() != 64) {
        throw ConfigError("expected 64 hex characters, got " +
                          std::to_string(hex.size()));
    }
    Digest32 out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_nibble(hex[2 * i]);
        const int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw ConfigError("invalid hex digit in digest/seed string");
        }
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

std::array<std::uint8_t, 32> seed_from_hex(std::string_view hex) {
    return digest_from_hex(hex);
}

}  // namespace adpr
