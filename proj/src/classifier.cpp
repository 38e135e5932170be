#include "detect/classifier.hpp"

#include <array>
#include <stdexcept>

#include "detect/error.hpp"
#include "detect/parallel.hpp"

namespace detect {

namespace {

constexpr std::array<std::string_view, 7> kNames = {"extra-trees", "random-forest",        "bagging", "decision-tree",
                                                    "adaboost",    "logistic-regression", "knn"};

EnsembleKind ensemble_kind(ModelKind kind) {
    switch (kind) {
        case ModelKind::ExtraTrees: return EnsembleKind::ExtraTrees;
        case ModelKind::RandomForest: return EnsembleKind::RandomForest;
        case ModelKind::Bagging: return EnsembleKind::Bagging;
        case ModelKind::DecisionTree: return EnsembleKind::DecisionTree;
        default: throw std::logic_error("not an ensemble kind");
    }
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view model_name(ModelKind kind) noexcept { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<ModelKind> parse_model_name(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return static_cast<ModelKind>(i);
    }
    return std::nullopt;
}

const std::vector<ModelKind>& implemented_models() {
    static const std::vector<ModelKind> kinds = {ModelKind::LogisticRegression, ModelKind::DecisionTree,
                                                 ModelKind::Knn,                ModelKind::RandomForest,
                                                 ModelKind::AdaBoost,           ModelKind::Bagging,
                                                 ModelKind::ExtraTrees};
    return kinds;
}

const std::vector<std::string>& unimplemented_model_names() {
    static const std::vector<std::string> names = {"svm", "gradient-boosting", "mlp", "lstm"};
    return names;
}

nlohmann::json to_json(const ModelOptions& o) {
    auto opt = [](const std::optional<std::size_t>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"trees", opt(o.trees)},
            {"k", o.k},
            {"rounds", o.rounds},
            {"learning_rate", o.logistic.learning_rate},
            {"epochs", o.logistic.epochs},
            {"l2", o.logistic.l2},
            {"max_depth", opt(o.max_depth)},
            {"min_samples_split", opt(o.min_samples_split)},
            {"seed", o.seed}};
}

Classifier fit_classifier(ModelKind kind, const ModelOptions& options, const SparseMatrix& x,
                          std::span<const Label> y) {
    switch (kind) {
        case ModelKind::ExtraTrees:
        case ModelKind::RandomForest:
        case ModelKind::Bagging:
        case ModelKind::DecisionTree: {
            const auto ek = ensemble_kind(kind);
            auto params = EnsembleParams::defaults(ek);
            if (options.trees && kind != ModelKind::DecisionTree) params.n_trees = *options.trees;
            params.seed = options.seed;
            params.max_depth = options.max_depth;
            params.min_samples_split = options.min_samples_split;
            return fit_ensemble(ek, params, x, y, options.jobs);
        }
        case ModelKind::AdaBoost: return fit_adaboost(x, y, options.rounds, options.seed);
        case ModelKind::LogisticRegression: {
            auto config = options.logistic;
            config.seed = options.seed;
            return fit_logistic_regression(x, y, config);
        }
        case ModelKind::Knn: return fit_knn(x, y, options.k);
    }
    throw std::logic_error("unhandled model kind");
}

ModelKind kind_of(const Classifier& classifier) noexcept {
    return std::visit(Overloaded{[](const Ensemble& e) {
                                     switch (e.kind) {
                                         case EnsembleKind::ExtraTrees: return ModelKind::ExtraTrees;
                                         case EnsembleKind::RandomForest: return ModelKind::RandomForest;
                                         case EnsembleKind::Bagging: return ModelKind::Bagging;
                                         case EnsembleKind::DecisionTree: break;
                                     }
                                     return ModelKind::DecisionTree;
                                 },
                                 [](const LinearModel&) { return ModelKind::LogisticRegression; },
                                 [](const KnnModel&) { return ModelKind::Knn; },
                                 [](const BoostedModel&) { return ModelKind::AdaBoost; }},
                      classifier);
}

std::size_t feature_count(const Classifier& classifier) noexcept {
    return std::visit(Overloaded{[](const Ensemble& e) { return e.n_features; },
                                 [](const LinearModel& m) { return m.weights.size(); },
                                 [](const KnnModel& m) { return m.n_features(); },
                                 [](const BoostedModel& m) { return m.n_features; }},
                      classifier);
}

std::vector<double> classifier_scores(const Classifier& classifier, const SparseMatrix& x, std::size_t jobs) {
    return std::visit(Overloaded{[&](const Ensemble& e) { return ensemble_proba(e, x, jobs); },
                                 [&](const LinearModel& m) { return predict_logistic(m, x); },
                                 [&](const KnnModel& m) { return knn_proba(m, x, jobs); },
                                 [&](const BoostedModel& m) {
                                     std::vector<double> out;
                                     out.reserve(x.n_rows());
                                     for (const auto& row : x.rows) out.push_back(adaboost_score(m, row));
                                     return out;
                                 }},
                      classifier);
}

std::vector<Label> classifier_labels(const Classifier& classifier, const SparseMatrix& x, std::size_t jobs) {
    if (const auto* e = std::get_if<Ensemble>(&classifier)) return ensemble_predict(*e, x, jobs);
    if (const auto* m = std::get_if<BoostedModel>(&classifier)) {
        std::vector<Label> out;
        out.reserve(x.n_rows());
        for (const auto& row : x.rows) out.push_back(adaboost_predict(*m, row));
        return out;
    }
    // Logistic probability and KNN vote fraction both decide at > 0.5.
    const auto scores = classifier_scores(classifier, x, jobs);
    std::vector<Label> out;
    out.reserve(scores.size());
    for (const double s : scores) out.push_back(s > 0.5 ? Label::ChatGPT : Label::Human);
    return out;
}

nlohmann::json to_json(const Classifier& classifier) {
    auto model = std::visit([](const auto& m) { return to_json(m); }, classifier);
    return {{"kind", model_name(kind_of(classifier))}, {"model", std::move(model)}};
}

Classifier classifier_from_json(const nlohmann::json& j) {
    try {
        const auto name = j.at("kind").get<std::string>();
        const auto kind = parse_model_name(name);
        if (!kind) throw BundleError("unknown classifier kind '" + name + "'");
        const auto& m = j.at("model");
        switch (*kind) {
            case ModelKind::ExtraTrees:
            case ModelKind::RandomForest:
            case ModelKind::Bagging:
            case ModelKind::DecisionTree: {
                auto e = ensemble_from_json(m);
                if (e.kind != ensemble_kind(*kind)) throw BundleError("classifier kind disagrees with its model");
                return e;
            }
            case ModelKind::AdaBoost: return boosted_from_json(m);
            case ModelKind::LogisticRegression: return linear_from_json(m);
            case ModelKind::Knn: return knn_from_json(m);
        }
    } catch (const BundleError&) {
        throw;
    } catch (const std::exception& e) {
        throw BundleError(std::string("malformed classifier: ") + e.what());
    }
    throw BundleError("unhandled classifier kind");
}

}  // namespace detect
