#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "detect/tree.hpp"

namespace detect {

enum class EnsembleKind { ExtraTrees, RandomForest, Bagging, DecisionTree };

std::string_view to_string(EnsembleKind kind) noexcept;

struct EnsembleParams {
    std::size_t n_trees = 50;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    bool bootstrap = false;
    SplitRule rule = SplitRule::Random;
    std::uint64_t seed = 42;
    std::optional<std::size_t> max_depth;
    std::optional<std::size_t> min_samples_split;

    /// Hyperparameters of each kind as used by the fit_* helpers.
    static EnsembleParams defaults(EnsembleKind kind);

    friend bool operator==(const EnsembleParams&, const EnsembleParams&) = default;
};

/// Majority-vote tree ensemble. Tree i is grown from derive_seed(seed, i),
/// so results do not depend on training parallelism.
struct Ensemble {
    EnsembleKind kind = EnsembleKind::ExtraTrees;
    EnsembleParams params;
    std::size_t n_features = 0;
    std::vector<DecisionTree> trees;

    friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Throws InputError for an empty training set or zero trees.
Ensemble fit_ensemble(EnsembleKind kind, const EnsembleParams& params, const SparseMatrix& x,
                      std::span<const Label> y, std::size_t jobs = 1);

/// Random thresholds, ceil(sqrt(V)) features per node, every tree on the full training set.
Ensemble fit_extra_trees(const SparseMatrix& x, std::span<const Label> y, std::size_t n_trees = 50,
                         std::uint64_t seed = 42, std::size_t jobs = 1);
/// Best gini splits, ceil(sqrt(V)) features per node, bootstrap per tree.
Ensemble fit_random_forest(const SparseMatrix& x, std::span<const Label> y, std::size_t n_trees = 100,
                           std::uint64_t seed = 42, std::size_t jobs = 1);
/// Full decision trees (all features) on bootstrap resamples.
Ensemble fit_bagging(const SparseMatrix& x, std::span<const Label> y, std::size_t n_trees = 10,
                     std::uint64_t seed = 42, std::size_t jobs = 1);
/// One unpruned best-split tree over all features and all samples.
Ensemble fit_decision_tree(const SparseMatrix& x, std::span<const Label> y, std::uint64_t seed = 42);

/// Training rows for tree `tree_index`: N draws with replacement when
/// bootstrapping, otherwise 0..N-1. Consumes `rng` only when bootstrapping.
std::vector<SampleIndex> tree_sample(std::size_t n_samples, bool bootstrap, Rng& rng);

std::size_t chatgpt_votes(const Ensemble& ensemble, const SparseVector& row);
/// Fraction of trees voting ChatGPT.
double ensemble_proba(const Ensemble& ensemble, const SparseVector& row);
/// ChatGPT iff proba > 0.5; an exact tie is Human.
Label ensemble_predict(const Ensemble& ensemble, const SparseVector& row);

std::vector<double> ensemble_proba(const Ensemble& ensemble, const SparseMatrix& x, std::size_t jobs = 1);
std::vector<Label> ensemble_predict(const Ensemble& ensemble, const SparseMatrix& x, std::size_t jobs = 1);

nlohmann::json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& j);

}  // namespace detect
