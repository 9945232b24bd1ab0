#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adpr/hash.hpp"

namespace adpr {

/// ceil(log2(m)) for m >= 1 (0 for m = 1).
std::size_t ceil_log2(std::uint64_t m);

/// Standard binary Merkle tree over precomputed leaf digests. A level with
/// an odd node count duplicates its last node. Every authentication path
/// has length ceil(log2(leaf_count)).
class MerkleTree {
public:
    explicit MerkleTree(std::vector<Digest32> leaves);

    const Digest32& root() const { return levels_.back().back(); }
    std::size_t leaf_count() const { return levels_.front().size(); }
    std::size_t depth() const { return levels_.size() - 1; }

    /// Sibling digests from the leaf level upward.
    std::vector<Digest32> path(std::size_t index) const;

    /// Recompute the root from a leaf digest and its path. The path length
    /// must match the depth implied by leaf_count exactly.
    static bool verify_path(const Digest32& leaf, std::size_t index,
                            std::uint64_t leaf_count,
                            std::span<const Digest32> path,
                            const Digest32& root);

private:
    // levels_[0] = leaves, levels_.back() = {root}
    std::vector<std::vector<Digest32>> levels_;
};

Digest32 hash_pair(const Digest32& left, const Digest32& right);

}  // namespace adpr
