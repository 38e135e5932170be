#include "detect/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace detect {

namespace {

__extension__ typedef unsigned __int128 u128;

// Minimising the weighted child gini is the same as maximising
// sq_left / n_left + sq_right / n_right, where sq is the sum of squared class
// counts. Kept as an exact fraction so equal splits compare equal and the
// tie-break rule is applied without rounding noise.
struct SplitScore {
    u128 num = 0;
    u128 den = 1;

    static SplitScore of(const ClassCounts& left, const ClassCounts& right) noexcept {
        const u128 n_left = left[0] + left[1];
        const u128 n_right = right[0] + right[1];
        const u128 sq_left = u128(left[0]) * left[0] + u128(left[1]) * left[1];
        const u128 sq_right = u128(right[0]) * right[0] + u128(right[1]) * right[1];
        return {sq_left * n_right + sq_right * n_left, n_left * n_right};
    }

    bool beats(const SplitScore& other) const noexcept { return num * other.den > other.num * den; }
};

double weighted_gini(const ClassCounts& left, const ClassCounts& right) {
    const double n_left = static_cast<double>(left[0] + left[1]);
    const double n_right = static_cast<double>(right[0] + right[1]);
    return (n_left * gini_impurity(left) + n_right * gini_impurity(right)) / (n_left + n_right);
}

ClassCounts minus(const ClassCounts& a, const ClassCounts& b) noexcept { return {a[0] - b[0], a[1] - b[1]}; }

double midpoint(double a, double b) noexcept {
    const double mid = a + (b - a) / 2.0;
    return mid < b ? mid : a;  // a and b adjacent doubles
}

std::vector<FeatureIndex> sorted_unique(std::span<const FeatureIndex> features) {
    std::vector<FeatureIndex> out(features.begin(), features.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct Group {
    double value;
    ClassCounts counts;
};

}  // namespace

double gini_impurity(const ClassCounts& counts) {
    const auto total = counts[0] + counts[1];
    if (total == 0) throw std::invalid_argument("gini impurity of an empty node");
    const double p0 = static_cast<double>(counts[0]) / static_cast<double>(total);
    const double p1 = static_cast<double>(counts[1]) / static_cast<double>(total);
    return 1.0 - (p0 * p0 + p1 * p1);
}

double gini_impurity(std::span<const double> class_weights) {
    double total = 0.0;
    for (const double w : class_weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("gini impurity of an empty node");
    double sum_sq = 0.0;
    for (const double w : class_weights) sum_sq += (w / total) * (w / total);
    return 1.0 - sum_sq;
}

std::size_t feature_budget(MaxFeatures rule, std::size_t n_features) noexcept {
    if (rule == MaxFeatures::All) return n_features;
    auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
    while (k * k < n_features) ++k;
    while (k > 0 && (k - 1) * (k - 1) >= n_features) --k;
    return k;
}

SplitFinder::SplitFinder(const SparseMatrix& x, std::span<const Label> y)
    : x_(x), y_(y), stamp_(x.n_cols, 0), slot_(x.n_cols, -1), range_(x.n_cols) {
    if (x.n_rows() != y.size()) throw std::invalid_argument("feature rows and labels differ in length");
}

ClassCounts SplitFinder::count_labels(std::span<const SampleIndex> rows) const noexcept {
    ClassCounts counts{};
    for (const auto r : rows) ++counts[index_of(y_[r])];
    return counts;
}

void SplitFinder::scan_ranges(std::span<const SampleIndex> rows, std::span<const FeatureIndex> features) {
    if (++epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
    }
    for (std::size_t k = 0; k < features.size(); ++k) {
        const auto f = features[k];
        stamp_[f] = epoch_;
        slot_[f] = static_cast<std::int32_t>(k);
        range_[f] = Range{0, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    }
    for (const auto r : rows) {
        for (const auto& e : x_.rows[r].entries()) {
            if (stamp_[e.column] != epoch_) continue;
            auto& range = range_[e.column];
            ++range.present;
            range.min = std::min(range.min, e.weight);
            range.max = std::max(range.max, e.weight);
        }
    }
    for (const auto f : features) {
        auto& range = range_[f];
        if (range.present < rows.size()) {
            range.min = std::min(range.min, 0.0);
            range.max = std::max(range.max, 0.0);
        }
    }
}

bool SplitFinder::varies(FeatureIndex f) const noexcept {
    return range_[f].min < range_[f].max;
}

std::vector<FeatureIndex> SplitFinder::varying_features(std::span<const SampleIndex> rows) {
    if (++epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
    }
    std::vector<FeatureIndex> touched;
    for (const auto r : rows) {
        for (const auto& e : x_.rows[r].entries()) {
            auto& range = range_[e.column];
            if (stamp_[e.column] != epoch_) {
                stamp_[e.column] = epoch_;
                range = Range{0, e.weight, e.weight};
                touched.push_back(e.column);
            }
            ++range.present;
            range.min = std::min(range.min, e.weight);
            range.max = std::max(range.max, e.weight);
        }
    }
    std::vector<FeatureIndex> out;
    for (const auto f : touched) {
        // Any absent sample contributes a 0, and stored weights are nonzero.
        if (range_[f].present < rows.size() || range_[f].min < range_[f].max) out.push_back(f);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<Split> SplitFinder::best(std::span<const SampleIndex> rows, std::span<const FeatureIndex> features) {
    if (rows.size() < 2) return std::nullopt;
    const auto feats = sorted_unique(features);
    const auto node = count_labels(rows);

    if (++epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
    }
    std::vector<std::vector<std::pair<double, Label>>> buckets(feats.size());
    for (std::size_t k = 0; k < feats.size(); ++k) {
        stamp_[feats[k]] = epoch_;
        slot_[feats[k]] = static_cast<std::int32_t>(k);
    }
    for (const auto r : rows) {
        for (const auto& e : x_.rows[r].entries()) {
            if (stamp_[e.column] == epoch_) buckets[slot_[e.column]].emplace_back(e.weight, y_[r]);
        }
    }

    std::optional<Split> best;
    SplitScore best_score;
    ClassCounts best_left{};
    std::vector<Group> groups;
    for (std::size_t k = 0; k < feats.size(); ++k) {
        auto& values = buckets[k];
        std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

        groups.clear();
        ClassCounts present{};
        for (const auto& [value, label] : values) {
            if (groups.empty() || groups.back().value != value) groups.push_back({value, {}});
            ++groups.back().counts[index_of(label)];
            ++present[index_of(label)];
        }
        const auto absent = minus(node, present);
        if (absent[0] + absent[1] > 0) {
            const auto pos = std::lower_bound(groups.begin(), groups.end(), 0.0,
                                              [](const Group& g, double v) { return g.value < v; });
            groups.insert(pos, Group{0.0, absent});
        }

        ClassCounts left{};
        for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
            left[0] += groups[g].counts[0];
            left[1] += groups[g].counts[1];
            const auto right = minus(node, left);
            const auto score = SplitScore::of(left, right);
            if (!best || score.beats(best_score)) {
                best = Split{feats[k], midpoint(groups[g].value, groups[g + 1].value), 0.0};
                best_score = score;
                best_left = left;
            }
        }
    }
    if (best) best->impurity = weighted_gini(best_left, minus(node, best_left));
    return best;
}

std::optional<Split> SplitFinder::random(std::span<const SampleIndex> rows, std::span<const FeatureIndex> features,
                                         Rng& rng) {
    if (rows.size() < 2) return std::nullopt;
    const auto feats = sorted_unique(features);
    const auto node = count_labels(rows);
    scan_ranges(rows, feats);

    // Draw thresholds in ascending feature order so the stream is reproducible.
    std::vector<double> thresholds(feats.size(), std::numeric_limits<double>::quiet_NaN());
    bool any = false;
    for (std::size_t k = 0; k < feats.size(); ++k) {
        const auto& range = range_[feats[k]];
        if (!varies(feats[k])) continue;
        thresholds[k] = std::nextafter(range.min, range.max) < range.max ? rng.uniform_open(range.min, range.max)
                                                                          : range.min;
        any = true;
    }
    if (!any) return std::nullopt;

    std::vector<ClassCounts> right(feats.size(), ClassCounts{});
    std::vector<ClassCounts> present(feats.size(), ClassCounts{});
    for (const auto r : rows) {
        for (const auto& e : x_.rows[r].entries()) {
            if (stamp_[e.column] != epoch_) continue;
            const auto k = static_cast<std::size_t>(slot_[e.column]);
            ++present[k][index_of(y_[r])];
            if (e.weight > thresholds[k]) ++right[k][index_of(y_[r])];
        }
    }

    std::optional<Split> best;
    SplitScore best_score;
    ClassCounts best_left{};
    for (std::size_t k = 0; k < feats.size(); ++k) {
        if (std::isnan(thresholds[k])) continue;
        auto r = right[k];
        if (0.0 > thresholds[k]) {
            const auto absent = minus(node, present[k]);
            r[0] += absent[0];
            r[1] += absent[1];
        }
        const auto left = minus(node, r);
        const auto score = SplitScore::of(left, r);
        if (!best || score.beats(best_score)) {
            best = Split{feats[k], thresholds[k], 0.0};
            best_score = score;
            best_left = left;
        }
    }
    best->impurity = weighted_gini(best_left, minus(node, best_left));
    return best;
}

std::optional<Split> best_split(const SparseMatrix& x, std::span<const Label> y, std::span<const SampleIndex> rows,
                                std::span<const FeatureIndex> features) {
    SplitFinder finder(x, y);
    return finder.best(rows, features);
}

std::optional<Split> random_split(const SparseMatrix& x, std::span<const Label> y,
                                  std::span<const SampleIndex> rows, std::span<const FeatureIndex> features,
                                  Rng& rng) {
    SplitFinder finder(x, y);
    return finder.random(rows, features, rng);
}

const TreeNode& DecisionTree::leaf_for(const SparseVector& row) const {
    if (nodes_.empty()) throw std::logic_error("empty tree");
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(row.at(static_cast<FeatureIndex>(n.feature)) <= n.threshold ? n.left : n.right);
    }
    return nodes_[i];
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[i].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
        }
    }
    return deepest;
}

std::size_t DecisionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

DecisionTree grow_tree(const SparseMatrix& x, std::span<const Label> y, std::span<const SampleIndex> rows,
                       const TreeParams& params, Rng& rng) {
    if (rows.empty()) throw std::invalid_argument("cannot grow a tree on zero samples");

    SplitFinder finder(x, y);
    const auto budget = feature_budget(params.max_features, x.n_cols);
    std::vector<SampleIndex> samples(rows.begin(), rows.end());
    std::vector<TreeNode> nodes(1);

    struct Pending {
        std::size_t node, lo, hi, depth;
    };
    std::vector<Pending> stack{{0, 0, samples.size(), 0}};
    while (!stack.empty()) {
        const auto task = stack.back();
        stack.pop_back();
        const std::span<SampleIndex> span(samples.data() + task.lo, task.hi - task.lo);
        const auto counts = finder.count_labels(span);

        auto make_leaf = [&] { nodes[task.node].counts = counts; };
        const bool pure = counts[0] == 0 || counts[1] == 0;
        const bool too_deep = params.max_depth && task.depth >= *params.max_depth;
        const bool too_small = params.min_samples_split && span.size() < *params.min_samples_split;
        if (pure || span.size() < 2 || too_deep || too_small) {
            make_leaf();
            continue;
        }

        auto candidates = finder.varying_features(span);
        if (candidates.size() > budget) {
            rng.select_prefix(std::span(candidates), budget);
            candidates.resize(budget);
            std::sort(candidates.begin(), candidates.end());
        }
        const auto split = params.rule == SplitRule::Best ? finder.best(span, candidates)
                                                          : finder.random(span, candidates, rng);
        if (!split) {
            make_leaf();
            continue;
        }

        const auto mid = std::stable_partition(span.begin(), span.end(), [&](SampleIndex r) {
            return x.rows[r].at(split->feature) <= split->threshold;
        });
        const auto n_left = static_cast<std::size_t>(mid - span.begin());
        if (n_left == 0 || n_left == span.size()) {
            make_leaf();
            continue;
        }

        const auto left = nodes.size();
        nodes.resize(nodes.size() + 2);
        auto& node = nodes[task.node];
        node.feature = static_cast<std::int32_t>(split->feature);
        node.threshold = split->threshold;
        node.left = static_cast<std::int32_t>(left);
        node.right = static_cast<std::int32_t>(left + 1);
        stack.push_back({left + 1, task.lo + n_left, task.hi, task.depth + 1});
        stack.push_back({left, task.lo, task.lo + n_left, task.depth + 1});
    }
    return DecisionTree(std::move(nodes));
}

namespace {

nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, std::size_t i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) return {{"counts", {n.counts[0], n.counts[1]}}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", node_to_json(nodes, static_cast<std::size_t>(n.left))},
            {"right", node_to_json(nodes, static_cast<std::size_t>(n.right))}};
}

// Rebuilds the same preorder layout grow_tree produces: children of a node
// are allocated together, left first, and the left subtree is expanded first.
void node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes, std::size_t i) {
    if (j.contains("counts")) {
        const auto& c = j.at("counts");
        nodes[i].counts = {c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()};
        if (nodes[i].counts[0] + nodes[i].counts[1] == 0) throw std::invalid_argument("leaf with zero samples");
        return;
    }
    const auto left = nodes.size();
    nodes.resize(nodes.size() + 2);
    nodes[i].feature = j.at("feature").get<std::int32_t>();
    nodes[i].threshold = j.at("threshold").get<double>();
    nodes[i].left = static_cast<std::int32_t>(left);
    nodes[i].right = static_cast<std::int32_t>(left + 1);
    if (nodes[i].feature < 0) throw std::invalid_argument("negative feature index");
    node_from_json(j.at("left"), nodes, left);
    node_from_json(j.at("right"), nodes, left + 1);
}

}  // namespace

nlohmann::json to_json(const DecisionTree& tree) { return node_to_json(tree.nodes(), 0); }

DecisionTree tree_from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes(1);
    node_from_json(j, nodes, 0);
    return DecisionTree(std::move(nodes));
}

}  // namespace detect
