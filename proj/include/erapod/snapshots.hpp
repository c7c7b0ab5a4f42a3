#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "erapod/linalg.hpp"

namespace erapod {

enum class SnapshotKind { primal, adjoint };

constexpr const char* to_string(SnapshotKind k) { return k == SnapshotKind::primal ? "primal" : "adjoint"; }

/// Column-stacked impulse-response states: block k holds A^{kP}B (primal) or
/// (A*)^{kP}C* (adjoint), `block_width` columns per block, channel-major.
struct SnapshotMatrix {
    Matrix data;
    Index block_width = 1;
    int period = 1;
    SnapshotKind kind = SnapshotKind::primal;

    Index state_dim() const { return data.rows(); }
    Index block_count() const { return block_width == 0 ? 0 : data.cols() / block_width; }
    auto block(Index k) const { return data.middleCols(k * block_width, block_width); }
};

/// Impulse-response output blocks C A^k B keyed by the exponent k.
/// `indices` is strictly increasing; `pattern` keeps the requested exponent
/// sequence (which may repeat exponents when P = 1).
struct MarkovSequence {
    std::vector<Matrix> blocks;
    std::vector<long> indices;
    std::vector<long> pattern;

    std::size_t size() const { return blocks.size(); }
    Index output_dim() const { return blocks.empty() ? 0 : blocks.front().rows(); }
    Index input_dim() const { return blocks.empty() ? 0 : blocks.front().cols(); }

    bool contains(long exponent) const { return std::binary_search(indices.begin(), indices.end(), exponent); }

    const Matrix& at_exponent(long exponent) const {
        const auto it = std::lower_bound(indices.begin(), indices.end(), exponent);
        if (it == indices.end() || *it != exponent)
            detail::fail(ErrorKind::MissingExponent, "no Markov block at exponent k=" + std::to_string(exponent));
        return blocks[static_cast<std::size_t>(it - indices.begin())];
    }

    /// All blocks side by side, q x (p * size()).
    Matrix stacked() const { return hstack(blocks); }
};

}  // namespace erapod
