#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "detect/baselines.hpp"
#include "detect/ensemble.hpp"

namespace detect {

enum class ModelKind { ExtraTrees, RandomForest, Bagging, DecisionTree, AdaBoost, LogisticRegression, Knn };

std::string_view model_name(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model_name(std::string_view name) noexcept;

/// CLI names of every implemented model, in a fixed order.
const std::vector<ModelKind>& implemented_models();
/// Comparison rows that are listed but have no implementation.
const std::vector<std::string>& unimplemented_model_names();

/// Hyperparameters for any model kind; each kind reads the fields it uses.
struct ModelOptions {
    std::optional<std::size_t> trees;  // unset: per-kind default (50 / 100 / 10 / 1)
    std::size_t k = 5;
    std::size_t rounds = 50;
    LogisticConfig logistic;
    std::optional<std::size_t> max_depth;
    std::optional<std::size_t> min_samples_split;
    std::uint64_t seed = 42;
    std::size_t jobs = 1;  // not part of the model; results do not depend on it
};

nlohmann::json to_json(const ModelOptions& options);

using Classifier = std::variant<Ensemble, LinearModel, KnnModel, BoostedModel>;

Classifier fit_classifier(ModelKind kind, const ModelOptions& options, const SparseMatrix& x,
                          std::span<const Label> y);

ModelKind kind_of(const Classifier& classifier) noexcept;
std::size_t feature_count(const Classifier& classifier) noexcept;

/// ChatGPT score in [0, 1] per row (vote fraction, probability, or weighted vote).
std::vector<double> classifier_scores(const Classifier& classifier, const SparseMatrix& x, std::size_t jobs = 1);
/// Labels under each model's own decision rule.
std::vector<Label> classifier_labels(const Classifier& classifier, const SparseMatrix& x, std::size_t jobs = 1);

/// {"kind": <model name>, "model": <model-specific record>}
nlohmann::json to_json(const Classifier& classifier);
Classifier classifier_from_json(const nlohmann::json& j);

}  // namespace detect
