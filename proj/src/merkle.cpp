#include "adpr/merkle.hpp"

#include <bit>

#include "adpr/errors.hpp"

namespace adpr {

std::size_t ceil_log2(std::uint64_t m) {
    if (m == 0) {
        throw DomainError("ceil_log2: zero");
    }
    return m == 1 ? 0 : static_cast<std::size_t>(std::bit_width(m - 1));
}

Digest32 hash_pair(const Digest32& left, const Digest32& right) {
    std::array<std::uint8_t, 64> buf;
    std::copy(left.begin(), left.end(), buf.begin());
    std::copy(right.begin(), right.end(), buf.begin() + 32);
    return sha256(std::span<const std::uint8_t>(buf));
}

MerkleTree::MerkleTree(std::vector<Digest32> leaves) {
    if (leaves.empty()) {
        throw EmptyInput("merkle: no leaves");
    }
    levels_.push_back(std::move(leaves));
    while (levels_.back().size() > 1) {
        const auto& prev = levels_.back();
        std::vector<Digest32> next;
        next.reserve((prev.size() + 1) / 2);
        for (std::size_t i = 0; i < prev.size(); i += 2) {
            const Digest32& left = prev[i];
            const Digest32& right = (i + 1 < prev.size()) ? prev[i + 1] : prev[i];
            next.push_back(hash_pair(left, right));
        }
        levels_.push_back(std::move(next));
    }
}

std::vector<Digest32> MerkleTree::path(std::size_t index) const {
    if (index >= leaf_count()) {
        throw DomainError("merkle: leaf index out of range");
    }
    std::vector<Digest32> out;
    out.reserve(depth());
    std::size_t idx = index;
    for (std::size_t level = 0; level + 1 < levels_.size(); ++level) {
        const auto& nodes = levels_[level];
        const std::size_t sibling = idx ^ 1;
        out.push_back(sibling < nodes.size() ? nodes[sibling] : nodes[idx]);
        idx >>= 1;
    }
    return out;
}

bool MerkleTree::verify_path(const Digest32& leaf, std::size_t index,
                             std::uint64_t leaf_count,
                             std::span<const Digest32> path,
                             const Digest32& root) {
    if (leaf_count == 0 || index >= leaf_count) {
        return false;
    }
    if (path.size() != ceil_log2(leaf_count)) {
        return false;
    }
    Digest32 acc = leaf;
    std::size_t idx = index;
    for (const Digest32& sibling : path) {
        acc = (idx & 1) ? hash_pair(sibling, acc) : hash_pair(acc, sibling);
        idx >>= 1;
    }
    return acc == root;
}

}  // namespace adpr
