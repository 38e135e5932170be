#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "detect/corpus.hpp"
#include "detect/rng.hpp"
#include "detect/sparse.hpp"

namespace detect {

/// Sample index into the training matrix. Node sample lists may repeat an
/// index (bootstrap draws); each occurrence counts once.
using SampleIndex = std::uint32_t;

enum class SplitRule { Best, Random };
enum class MaxFeatures { All, Sqrt };

/// Left child takes samples with value <= threshold; absent sparse entries read as 0.
struct Split {
    FeatureIndex feature = 0;
    double threshold = 0.0;
    /// Count-weighted mean gini of the two children.
    double impurity = 0.0;
};

/// 1 - sum_c p_c^2. Throws std::invalid_argument when the total is zero.
double gini_impurity(const ClassCounts& counts);
double gini_impurity(std::span<const double> class_weights);

/// Number of candidate features per node under `rule` for `n_features` columns.
std::size_t feature_budget(MaxFeatures rule, std::size_t n_features) noexcept;

/// Reusable scratch space for split search over one training matrix.
/// Not thread-safe; use one instance per thread.
class SplitFinder {
public:
    SplitFinder(const SparseMatrix& x, std::span<const Label> y);

    /// Features taking at least two distinct values over `rows`, ascending.
    std::vector<FeatureIndex> varying_features(std::span<const SampleIndex> rows);

    /// Exhaustive gini search over midpoints of consecutive distinct values
    /// (0 included when some sample lacks the feature). Ties go to the lower
    /// feature index, then the lower threshold. Empty when no feature varies.
    std::optional<Split> best(std::span<const SampleIndex> rows, std::span<const FeatureIndex> features);

    /// One uniform threshold in (min, max) per varying feature, drawn in
    /// ascending feature order; keeps the draw with the lowest child gini.
    std::optional<Split> random(std::span<const SampleIndex> rows, std::span<const FeatureIndex> features,
                                Rng& rng);

    ClassCounts count_labels(std::span<const SampleIndex> rows) const noexcept;

private:
    struct Range {
        std::uint32_t present = 0;
        double min = 0.0;
        double max = 0.0;
    };

    void scan_ranges(std::span<const SampleIndex> rows, std::span<const FeatureIndex> features);
    bool varies(FeatureIndex f) const noexcept;

    const SparseMatrix& x_;
    std::span<const Label> y_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::int32_t> slot_;
    std::vector<Range> range_;
    std::uint32_t epoch_ = 0;
};

std::optional<Split> best_split(const SparseMatrix& x, std::span<const Label> y, std::span<const SampleIndex> rows,
                                std::span<const FeatureIndex> features);
std::optional<Split> random_split(const SparseMatrix& x, std::span<const Label> y,
                                  std::span<const SampleIndex> rows, std::span<const FeatureIndex> features,
                                  Rng& rng);

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    ClassCounts counts{};

    bool is_leaf() const noexcept { return feature < 0; }
    /// Majority class; ties go to Human.
    Label majority() const noexcept { return counts[1] > counts[0] ? Label::ChatGPT : Label::Human; }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeParams {
    SplitRule rule = SplitRule::Best;
    MaxFeatures max_features = MaxFeatures::All;
    std::optional<std::size_t> max_depth;
    std::optional<std::size_t> min_samples_split;
};

/// Flat node array, root at index 0.
class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const TreeNode& leaf_for(const SparseVector& row) const;
    Label vote(const SparseVector& row) const { return leaf_for(row).majority(); }
    std::size_t depth() const;
    std::size_t leaf_count() const noexcept;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

/// Grows an unpruned tree: a node becomes a leaf when it is pure, holds a
/// single sample, or no feature varies over it (or an optional depth or
/// min-samples limit is hit). Candidate features at each node are a fresh
/// uniform subset of the varying features, of size feature_budget().
/// Throws std::invalid_argument for an empty sample list.
DecisionTree grow_tree(const SparseMatrix& x, std::span<const Label> y, std::span<const SampleIndex> rows,
                       const TreeParams& params, Rng& rng);

/// Nested records: internal {feature, threshold, left, right}, leaf {counts}.
nlohmann::json to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j);

}  // namespace detect
