#include "detect/ensemble.hpp"

#include <numeric>
#include <stdexcept>

#include "detect/error.hpp"
#include "detect/parallel.hpp"

namespace detect {

namespace {

constexpr std::string_view kKindNames[] = {"extra-trees", "random-forest", "bagging", "decision-tree"};

EnsembleKind kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
        if (kKindNames[i] == name) return static_cast<EnsembleKind>(i);
    }
    throw std::invalid_argument("unknown ensemble kind: " + std::string(name));
}

void check_training_data(const SparseMatrix& x, std::span<const Label> y) {
    if (x.n_rows() != y.size()) throw std::invalid_argument("feature rows and labels differ in length");
    // Single-class data is allowed: every tree is then one leaf.
    if (y.empty()) throw InputError("no training samples");
}

nlohmann::json optional_json(const std::optional<std::size_t>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<std::size_t> optional_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::size_t>();
}

}  // namespace

std::string_view to_string(EnsembleKind kind) noexcept { return kKindNames[static_cast<std::size_t>(kind)]; }

EnsembleParams EnsembleParams::defaults(EnsembleKind kind) {
    EnsembleParams p;
    switch (kind) {
        case EnsembleKind::ExtraTrees:
            p.n_trees = 50;
            p.max_features = MaxFeatures::Sqrt;
            p.bootstrap = false;
            p.rule = SplitRule::Random;
            break;
        case EnsembleKind::RandomForest:
            p.n_trees = 100;
            p.max_features = MaxFeatures::Sqrt;
            p.bootstrap = true;
            p.rule = SplitRule::Best;
            break;
        case EnsembleKind::Bagging:
            p.n_trees = 10;
            p.max_features = MaxFeatures::All;
            p.bootstrap = true;
            p.rule = SplitRule::Best;
            break;
        case EnsembleKind::DecisionTree:
            p.n_trees = 1;
            p.max_features = MaxFeatures::All;
            p.bootstrap = false;
            p.rule = SplitRule::Best;
            break;
    }
    return p;
}

std::vector<SampleIndex> tree_sample(std::size_t n_samples, bool bootstrap, Rng& rng) {
    std::vector<SampleIndex> rows(n_samples);
    if (bootstrap) {
        for (auto& r : rows) r = static_cast<SampleIndex>(rng.below(n_samples));
    } else {
        std::iota(rows.begin(), rows.end(), SampleIndex{0});
    }
    return rows;
}

Ensemble fit_ensemble(EnsembleKind kind, const EnsembleParams& params, const SparseMatrix& x,
                      std::span<const Label> y, std::size_t jobs) {
    check_training_data(x, y);
    if (params.n_trees < 1) throw InputError("an ensemble needs at least one tree");

    Ensemble ensemble{kind, params, x.n_cols, std::vector<DecisionTree>(params.n_trees)};
    const TreeParams tree_params{params.rule, params.max_features, params.max_depth, params.min_samples_split};
    parallel_for(params.n_trees, jobs, [&](std::size_t t) {
        Rng rng(derive_seed(params.seed, t));
        const auto rows = tree_sample(x.n_rows(), params.bootstrap, rng);
        ensemble.trees[t] = grow_tree(x, y, rows, tree_params, rng);
    });
    return ensemble;
}

Ensemble fit_extra_trees(const SparseMatrix& x, std::span<const Label> y, std::size_t n_trees, std::uint64_t seed,
                         std::size_t jobs) {
    auto p = EnsembleParams::defaults(EnsembleKind::ExtraTrees);
    p.n_trees = n_trees;
    p.seed = seed;
    return fit_ensemble(EnsembleKind::ExtraTrees, p, x, y, jobs);
}

Ensemble fit_random_forest(const SparseMatrix& x, std::span<const Label> y, std::size_t n_trees,
                           std::uint64_t seed, std::size_t jobs) {
    auto p = EnsembleParams::defaults(EnsembleKind::RandomForest);
    p.n_trees = n_trees;
    p.seed = seed;
    return fit_ensemble(EnsembleKind::RandomForest, p, x, y, jobs);
}

Ensemble fit_bagging(const SparseMatrix& x, std::span<const Label> y, std::size_t n_trees, std::uint64_t seed,
                     std::size_t jobs) {
    auto p = EnsembleParams::defaults(EnsembleKind::Bagging);
    p.n_trees = n_trees;
    p.seed = seed;
    return fit_ensemble(EnsembleKind::Bagging, p, x, y, jobs);
}

Ensemble fit_decision_tree(const SparseMatrix& x, std::span<const Label> y, std::uint64_t seed) {
    auto p = EnsembleParams::defaults(EnsembleKind::DecisionTree);
    p.seed = seed;
    return fit_ensemble(EnsembleKind::DecisionTree, p, x, y, 1);
}

std::size_t chatgpt_votes(const Ensemble& ensemble, const SparseVector& row) {
    std::size_t votes = 0;
    for (const auto& tree : ensemble.trees) votes += tree.vote(row) == Label::ChatGPT ? 1 : 0;
    return votes;
}

double ensemble_proba(const Ensemble& ensemble, const SparseVector& row) {
    return static_cast<double>(chatgpt_votes(ensemble, row)) / static_cast<double>(ensemble.trees.size());
}

Label ensemble_predict(const Ensemble& ensemble, const SparseVector& row) {
    // 2 * votes > n_trees is proba > 0.5 without rounding.
    return 2 * chatgpt_votes(ensemble, row) > ensemble.trees.size() ? Label::ChatGPT : Label::Human;
}

std::vector<double> ensemble_proba(const Ensemble& ensemble, const SparseMatrix& x, std::size_t jobs) {
    std::vector<double> out(x.n_rows());
    parallel_for(x.n_rows(), jobs, [&](std::size_t i) { out[i] = ensemble_proba(ensemble, x.rows[i]); });
    return out;
}

std::vector<Label> ensemble_predict(const Ensemble& ensemble, const SparseMatrix& x, std::size_t jobs) {
    std::vector<Label> out(x.n_rows());
    parallel_for(x.n_rows(), jobs, [&](std::size_t i) { out[i] = ensemble_predict(ensemble, x.rows[i]); });
    return out;
}

nlohmann::json to_json(const Ensemble& ensemble) {
    const auto& p = ensemble.params;
    nlohmann::json hyper = {{"n_trees", p.n_trees},
                            {"max_features", p.max_features == MaxFeatures::Sqrt ? "sqrt" : "all"},
                            {"bootstrap", p.bootstrap},
                            {"split_rule", p.rule == SplitRule::Best ? "best" : "random"},
                            {"criterion", "gini"},
                            {"seed", p.seed},
                            {"max_depth", optional_json(p.max_depth)},
                            {"min_samples_split", optional_json(p.min_samples_split)}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : ensemble.trees) trees.push_back(to_json(tree));
    return {{"kind", to_string(ensemble.kind)},
            {"n_features", ensemble.n_features},
            {"hyperparams", hyper},
            {"trees", trees}};
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
    Ensemble e;
    e.kind = kind_from_string(j.at("kind").get<std::string>());
    e.n_features = j.at("n_features").get<std::size_t>();
    const auto& h = j.at("hyperparams");
    auto& p = e.params;
    p.n_trees = h.at("n_trees").get<std::size_t>();
    p.max_features = h.at("max_features") == "sqrt" ? MaxFeatures::Sqrt : MaxFeatures::All;
    p.bootstrap = h.at("bootstrap").get<bool>();
    p.rule = h.at("split_rule") == "best" ? SplitRule::Best : SplitRule::Random;
    p.seed = h.at("seed").get<std::uint64_t>();
    p.max_depth = optional_from(h, "max_depth");
    p.min_samples_split = optional_from(h, "min_samples_split");
    for (const auto& t : j.at("trees")) e.trees.push_back(tree_from_json(t));
    if (e.trees.size() != p.n_trees) throw std::invalid_argument("tree count does not match n_trees");
    for (const auto& tree : e.trees) {
        for (const auto& node : tree.nodes()) {
            if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= e.n_features) {
                throw std::invalid_argument("split feature outside the model's feature range");
            }
        }
    }
    return e;
}

}  // namespace detect
