#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "detect/corpus.hpp"
#include "detect/sparse.hpp"

namespace detect {

// ---------------------------------------------------------------- logistic

struct LogisticConfig {
    double learning_rate = 0.1;
    std::size_t epochs = 300;
    double l2 = 1e-4;
    std::uint64_t seed = 42;  // recorded only; zero init makes training deterministic
    double tolerance = 1e-6;  // stop once an epoch improves the loss by less than this
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    LogisticConfig config;
    std::size_t epochs_run = 0;
};

/// Mean log-loss plus (l2 / 2) * ||w||^2; the bias is not regularized.
double logistic_loss(const SparseMatrix& x, std::span<const Label> y, std::span<const double> weights, double bias,
                     double l2);

struct LogisticGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

LogisticGradient logistic_gradient(const SparseMatrix& x, std::span<const Label> y, std::span<const double> weights,
                                   double bias, double l2);

/// Full-batch gradient descent from zero weights. `loss_history`, when given,
/// receives the loss before every step. Throws InputError on degenerate data
/// or a non-finite loss.
LinearModel fit_logistic_regression(const SparseMatrix& x, std::span<const Label> y, const LogisticConfig& config = {},
                                    std::vector<double>* loss_history = nullptr);

double sigmoid(double z) noexcept;
double predict_logistic(const LinearModel& model, const SparseVector& row) noexcept;
std::vector<double> predict_logistic(const LinearModel& model, const SparseMatrix& x);

nlohmann::json to_json(const LinearModel& model);
LinearModel linear_from_json(const nlohmann::json& j);

// --------------------------------------------------------------------- knn

/// Training rows stored L2-normalized, with a column-wise inverted index for
/// fast dot products.
class KnnModel {
public:
    KnnModel() = default;
    /// `k` must be odd and positive. Throws InputError otherwise or when empty.
    KnnModel(std::size_t k, const SparseMatrix& x, std::span<const Label> y);

    std::size_t k() const noexcept { return k_; }
    /// k actually used: the largest odd number <= min(k, training size).
    std::size_t effective_k() const noexcept;
    std::size_t n_features() const noexcept { return n_features_; }
    const std::vector<SparseVector>& rows() const noexcept { return rows_; }
    const std::vector<Label>& labels() const noexcept { return labels_; }

    /// Training indices of the nearest rows by Euclidean distance between
    /// normalized vectors, closest first; equal distances by lower index.
    std::vector<std::size_t> nearest(const SparseVector& query, std::size_t count) const;

private:
    void build_index();

    std::size_t k_ = 5;
    std::size_t n_features_ = 0;
    std::vector<SparseVector> rows_;
    std::vector<Label> labels_;
    std::vector<double> squared_norms_;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;

    friend KnnModel knn_from_json(const nlohmann::json& j);
};

KnnModel fit_knn(const SparseMatrix& x, std::span<const Label> y, std::size_t k = 5);
Label knn_predict(const KnnModel& model, const SparseVector& query);
/// Fraction of the effective-k neighbours labelled ChatGPT.
double knn_proba(const KnnModel& model, const SparseVector& query);
std::vector<double> knn_proba(const KnnModel& model, const SparseMatrix& x, std::size_t jobs = 1);

nlohmann::json to_json(const KnnModel& model);
KnnModel knn_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- adaboost

struct Stump {
    FeatureIndex feature = 0;
    double threshold = 0.0;
    Label left_label = Label::Human;
    Label right_label = Label::ChatGPT;
    double alpha = 0.0;

    Label classify(const SparseVector& row) const noexcept {
        return row.at(feature) <= threshold ? left_label : right_label;
    }
};

struct BoostedModel {
    std::vector<Stump> stumps;
    std::size_t n_rounds = 50;
    std::size_t n_features = 0;
    std::uint64_t seed = 42;
};

/// Per-round record of a training run.
struct BoostingTrace {
    std::vector<double> errors;
    /// Normalized sample weights after each accepted round.
    std::vector<std::vector<double>> weights;
};

/// Depth-1 split minimizing weighted gini. Leaf labels are the weighted
/// majority of each side (Human on ties). Ties between splits go to the lower
/// feature, then the lower threshold. Returns false when no feature varies.
bool best_weighted_stump(const SparseMatrix& x, std::span<const Label> y, std::span<const double> weights,
                         Stump& out);

/// Discrete AdaBoost with labels in {-1, +1}. err is clipped below at 1e-10;
/// a round with err >= 0.5 ends training without being kept, and a perfect
/// round ends training after being kept.
BoostedModel fit_adaboost(const SparseMatrix& x, std::span<const Label> y, std::size_t n_rounds = 50,
                          std::uint64_t seed = 42, BoostingTrace* trace = nullptr);

/// Sum over stumps of alpha * h(x), h in {-1, +1}.
double adaboost_margin(const BoostedModel& model, const SparseVector& row) noexcept;
/// ChatGPT iff the margin is positive.
Label adaboost_predict(const BoostedModel& model, const SparseVector& row) noexcept;
/// Alpha-weighted fraction of stumps voting ChatGPT, in [0, 1].
double adaboost_score(const BoostedModel& model, const SparseVector& row) noexcept;

nlohmann::json to_json(const BoostedModel& model);
BoostedModel boosted_from_json(const nlohmann::json& j);

}  // namespace detect
