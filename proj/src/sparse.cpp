#include "detect/sparse.hpp"

#include <cmath>
#include <stdexcept>

namespace detect {

SparseVector::SparseVector(std::vector<SparseEntry> entries) : entries_(std::move(entries)) {
    std::erase_if(entries_, [](const SparseEntry& e) { return e.weight == 0.0; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i - 1].column >= entries_[i].column) {
            throw std::invalid_argument("sparse vector columns must be strictly increasing");
        }
    }
}

double SparseVector::squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += e.weight * e.weight;
    return s;
}

double SparseVector::dot(const SparseVector& other) const noexcept {
    double s = 0.0;
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() && b != other.entries_.end()) {
        if (a->column < b->column) {
            ++a;
        } else if (b->column < a->column) {
            ++b;
        } else {
            s += a->weight * b->weight;
            ++a;
            ++b;
        }
    }
    return s;
}

SparseVector SparseVector::normalized() const {
    const double norm = std::sqrt(squared_norm());
    if (norm == 0.0) return *this;
    SparseVector out = *this;
    for (auto& e : out.entries_) e.weight /= norm;
    return out;
}

SparseMatrix from_dense(const std::vector<std::vector<double>>& dense) {
    SparseMatrix m;
    for (const auto& row : dense) {
        std::vector<SparseEntry> entries;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] != 0.0) entries.push_back({static_cast<FeatureIndex>(j), row[j]});
        }
        m.n_cols = std::max(m.n_cols, row.size());
        m.rows.emplace_back(std::move(entries));
    }
    return m;
}

}  // namespace detect
