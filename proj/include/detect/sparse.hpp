#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace detect {

using FeatureIndex = std::uint32_t;

struct SparseEntry {
    FeatureIndex column;
    double weight;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Row of (column, weight) pairs. Columns strictly increasing, no stored zeros.
class SparseVector {
public:
    SparseVector() = default;

    /// Entries must already satisfy the ordering invariant; zeros are dropped.
    explicit SparseVector(std::vector<SparseEntry> entries);

    std::span<const SparseEntry> entries() const noexcept { return entries_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Value at `column`, 0 when absent.
    double at(FeatureIndex column) const noexcept {
        const auto it = std::lower_bound(entries_.begin(), entries_.end(), column,
                                         [](const SparseEntry& e, FeatureIndex c) { return e.column < c; });
        return (it != entries_.end() && it->column == column) ? it->weight : 0.0;
    }

    double squared_norm() const noexcept;
    double dot(const SparseVector& other) const noexcept;

    /// Copy scaled to unit L2 norm; the zero vector stays zero.
    SparseVector normalized() const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    std::vector<SparseEntry> entries_;
};

struct SparseMatrix {
    std::vector<SparseVector> rows;
    std::size_t n_cols = 0;

    std::size_t n_rows() const noexcept { return rows.size(); }
};

/// Builds a matrix from dense rows (test fixtures, small examples).
SparseMatrix from_dense(const std::vector<std::vector<double>>& dense);

}  // namespace detect
