#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "adpr/attest.hpp"

namespace adpr {

/// Receipts travel as one self-describing JSON document: hex digests,
/// decimal FixedQ raws, explicit field names, keys sorted. Serialization is
/// deterministic, so identical inputs yield byte-identical receipt files.
std::string receipt_to_json(const Receipt& receipt);
Receipt receipt_from_json(std::string_view text);

void write_receipt(const std::filesystem::path& path, const Receipt& receipt);
Receipt read_receipt(const std::filesystem::path& path);

}  // namespace adpr
