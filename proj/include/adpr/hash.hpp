#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace adpr {

using Digest32 = std::array<std::uint8_t, 32>;

/// One-shot SHA-256. This is the single hash used everywhere: noise stream,
/// blob trailer, Merkle leaves and nodes, journal digest, Fiat-Shamir.
Digest32 sha256(std::span<const std::uint8_t> data);
Digest32 sha256(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> bytes);
Digest32 digest_from_hex(std::string_view hex);
std::array<std::uint8_t, 32> seed_from_hex(std::string_view hex);

}  // namespace adpr
