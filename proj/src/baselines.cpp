#include "detect/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "detect/error.hpp"
#include "detect/parallel.hpp"
#include "detect/tree.hpp"

namespace detect {

namespace {

void check_training_data(const SparseMatrix& x, std::span<const Label> y) {
    if (x.n_rows() != y.size()) throw std::invalid_argument("feature rows and labels differ in length");
    if (y.empty()) throw InputError("empty training set");
    ClassCounts counts{};
    for (const auto label : y) ++counts[index_of(label)];
    if (counts[0] == 0 || counts[1] == 0) throw InputError("training data must contain both classes");
}

double target(Label label) noexcept { return label == Label::ChatGPT ? 1.0 : 0.0; }
double sign_of(Label label) noexcept { return label == Label::ChatGPT ? 1.0 : -1.0; }

// log(1 + exp(z)) without overflow.
double softplus(double z) noexcept { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double linear_score(std::span<const double> weights, double bias, const SparseVector& row) noexcept {
    double z = bias;
    for (const auto& e : row.entries()) z += weights[e.column] * e.weight;
    return z;
}

}  // namespace

// ---------------------------------------------------------------- logistic

double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logistic_loss(const SparseMatrix& x, std::span<const Label> y, std::span<const double> weights, double bias,
                     double l2) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        const double z = linear_score(weights, bias, x.rows[i]);
        total += softplus(z) - target(y[i]) * z;
    }
    double norm = 0.0;
    for (const double w : weights) norm += w * w;
    return total / static_cast<double>(x.n_rows()) + 0.5 * l2 * norm;
}

LogisticGradient logistic_gradient(const SparseMatrix& x, std::span<const Label> y, std::span<const double> weights,
                                   double bias, double l2) {
    LogisticGradient g{std::vector<double>(weights.size(), 0.0), 0.0};
    const double inv_n = 1.0 / static_cast<double>(x.n_rows());
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        const double residual = sigmoid(linear_score(weights, bias, x.rows[i])) - target(y[i]);
        for (const auto& e : x.rows[i].entries()) g.weights[e.column] += residual * e.weight;
        g.bias += residual;
    }
    for (std::size_t j = 0; j < weights.size(); ++j) g.weights[j] = g.weights[j] * inv_n + l2 * weights[j];
    g.bias *= inv_n;
    return g;
}

LinearModel fit_logistic_regression(const SparseMatrix& x, std::span<const Label> y, const LogisticConfig& config,
                                    std::vector<double>* loss_history) {
    check_training_data(x, y);
    if (!(config.learning_rate > 0.0)) throw InputError("learning rate must be positive");

    LinearModel model{std::vector<double>(x.n_cols, 0.0), 0.0, config, 0};
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss = logistic_loss(x, y, model.weights, model.bias, config.l2);
        if (!std::isfinite(loss)) {
            throw InputError("logistic loss became non-finite; lower the learning rate");
        }
        if (loss_history) loss_history->push_back(loss);
        if (previous - loss < config.tolerance) break;
        previous = loss;

        const auto g = logistic_gradient(x, y, model.weights, model.bias, config.l2);
        for (std::size_t j = 0; j < model.weights.size(); ++j) model.weights[j] -= config.learning_rate * g.weights[j];
        model.bias -= config.learning_rate * g.bias;
        model.epochs_run = epoch + 1;
    }
    return model;
}

double predict_logistic(const LinearModel& model, const SparseVector& row) noexcept {
    return sigmoid(linear_score(model.weights, model.bias, row));
}

std::vector<double> predict_logistic(const LinearModel& model, const SparseMatrix& x) {
    std::vector<double> out;
    out.reserve(x.n_rows());
    for (const auto& row : x.rows) out.push_back(predict_logistic(model, row));
    return out;
}

nlohmann::json to_json(const LinearModel& model) {
    const auto& c = model.config;
    return {{"weights", model.weights},
            {"bias", model.bias},
            {"epochs_run", model.epochs_run},
            {"config",
             {{"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"l2", c.l2},
              {"seed", c.seed},
              {"tolerance", c.tolerance}}}};
}

LinearModel linear_from_json(const nlohmann::json& j) {
    LinearModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.epochs_run = j.at("epochs_run").get<std::size_t>();
    const auto& c = j.at("config");
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.epochs = c.at("epochs").get<std::size_t>();
    m.config.l2 = c.at("l2").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.tolerance = c.at("tolerance").get<double>();
    return m;
}

// --------------------------------------------------------------------- knn

KnnModel::KnnModel(std::size_t k, const SparseMatrix& x, std::span<const Label> y)
    : k_(k), n_features_(x.n_cols), labels_(y.begin(), y.end()) {
    if (x.n_rows() != y.size()) throw std::invalid_argument("feature rows and labels differ in length");
    if (x.n_rows() == 0) throw InputError("k-nearest neighbours needs a non-empty training set");
    if (k == 0 || k % 2 == 0) throw InputError("k must be a positive odd number");
    rows_.reserve(x.n_rows());
    for (const auto& row : x.rows) rows_.push_back(row.normalized());
    build_index();
}

void KnnModel::build_index() {
    postings_.assign(n_features_, {});
    squared_norms_.clear();
    squared_norms_.reserve(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        squared_norms_.push_back(rows_[i].squared_norm());
        for (const auto& e : rows_[i].entries()) postings_.at(e.column).emplace_back(static_cast<std::uint32_t>(i), e.weight);
    }
}

std::size_t KnnModel::effective_k() const noexcept {
    auto k = std::min(k_, rows_.size());
    if (k % 2 == 0) --k;
    return k;
}

std::vector<std::size_t> KnnModel::nearest(const SparseVector& query, std::size_t count) const {
    const auto q = query.normalized();
    const double q_norm = q.squared_norm();
    std::vector<double> dots(rows_.size(), 0.0);
    for (const auto& e : q.entries()) {
        if (e.column >= postings_.size()) continue;
        for (const auto& [row, weight] : postings_[e.column]) dots[row] += e.weight * weight;
    }
    std::vector<std::pair<double, std::size_t>> dist(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        dist[i] = {std::max(0.0, q_norm + squared_norms_[i] - 2.0 * dots[i]), i};
    }
    count = std::min(count, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(count), dist.end());
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = dist[i].second;
    return out;
}

KnnModel fit_knn(const SparseMatrix& x, std::span<const Label> y, std::size_t k) { return KnnModel(k, x, y); }

double knn_proba(const KnnModel& model, const SparseVector& query) {
    const auto k = model.effective_k();
    const auto neighbours = model.nearest(query, k);
    std::size_t positive = 0;
    for (const auto i : neighbours) positive += model.labels()[i] == Label::ChatGPT ? 1 : 0;
    return static_cast<double>(positive) / static_cast<double>(k);
}

Label knn_predict(const KnnModel& model, const SparseVector& query) {
    return knn_proba(model, query) > 0.5 ? Label::ChatGPT : Label::Human;
}

std::vector<double> knn_proba(const KnnModel& model, const SparseMatrix& x, std::size_t jobs) {
    std::vector<double> out(x.n_rows());
    parallel_for(x.n_rows(), jobs, [&](std::size_t i) { out[i] = knn_proba(model, x.rows[i]); });
    return out;
}

nlohmann::json to_json(const KnnModel& model) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : model.rows()) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : row.entries()) entries.push_back({e.column, e.weight});
        rows.push_back(std::move(entries));
    }
    nlohmann::json labels = nlohmann::json::array();
    for (const auto label : model.labels()) labels.push_back(index_of(label));
    return {{"k", model.k()}, {"n_features", model.n_features()}, {"rows", rows}, {"labels", labels}};
}

KnnModel knn_from_json(const nlohmann::json& j) {
    KnnModel m;
    m.k_ = j.at("k").get<std::size_t>();
    m.n_features_ = j.at("n_features").get<std::size_t>();
    for (const auto& row : j.at("rows")) {
        std::vector<SparseEntry> entries;
        for (const auto& e : row) entries.push_back({e.at(0).get<FeatureIndex>(), e.at(1).get<double>()});
        m.rows_.emplace_back(std::move(entries));
    }
    for (const auto& label : j.at("labels")) m.labels_.push_back(label.get<int>() == 1 ? Label::ChatGPT : Label::Human);
    if (m.rows_.size() != m.labels_.size() || m.rows_.empty()) throw std::invalid_argument("malformed knn model");
    if (m.k_ == 0 || m.k_ % 2 == 0) throw std::invalid_argument("k must be a positive odd number");
    m.build_index();
    return m;
}

// ---------------------------------------------------------------- adaboost

bool best_weighted_stump(const SparseMatrix& x, std::span<const Label> y, std::span<const double> weights,
                         Stump& out) {
    std::array<double, kNumClasses> node{};
    for (std::size_t i = 0; i < y.size(); ++i) node[index_of(y[i])] += weights[i];
    const double total = node[0] + node[1];

    // Column-major copy of the nonzeros: (value, row) per feature.
    std::vector<std::vector<std::pair<double, std::uint32_t>>> columns(x.n_cols);
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        for (const auto& e : x.rows[i].entries()) columns[e.column].emplace_back(e.weight, static_cast<std::uint32_t>(i));
    }

    struct Group {
        double value;
        std::array<double, kNumClasses> w;
    };
    bool found = false;
    double best = std::numeric_limits<double>::infinity();
    std::array<double, kNumClasses> best_left{};
    std::vector<Group> groups;
    for (std::size_t f = 0; f < columns.size(); ++f) {
        auto& column = columns[f];
        if (column.empty()) continue;
        std::sort(column.begin(), column.end());
        groups.clear();
        std::array<double, kNumClasses> present{};
        std::size_t present_count = 0;
        for (const auto& [value, row] : column) {
            if (groups.empty() || groups.back().value != value) groups.push_back({value, {}});
            groups.back().w[index_of(y[row])] += weights[row];
            present[index_of(y[row])] += weights[row];
            ++present_count;
        }
        if (present_count < x.n_rows()) {
            const auto pos = std::lower_bound(groups.begin(), groups.end(), 0.0,
                                              [](const Group& g, double v) { return g.value < v; });
            groups.insert(pos, Group{0.0, {node[0] - present[0], node[1] - present[1]}});
        }
        std::array<double, kNumClasses> left{};
        for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
            left[0] += groups[g].w[0];
            left[1] += groups[g].w[1];
            const std::array<double, kNumClasses> right{node[0] - left[0], node[1] - left[1]};
            const double w_left = left[0] + left[1];
            const double w_right = right[0] + right[1];
            double impurity = 0.0;
            if (w_left > 0.0) impurity += w_left * gini_impurity(std::span<const double>(left));
            if (w_right > 0.0) impurity += w_right * gini_impurity(std::span<const double>(right));
            impurity /= total;
            if (!found || impurity < best - 1e-12) {
                const double a = groups[g].value;
                const double b = groups[g + 1].value;
                const double mid = a + (b - a) / 2.0;
                out.feature = static_cast<FeatureIndex>(f);
                out.threshold = mid < b ? mid : a;
                best = impurity;
                best_left = left;
                found = true;
            }
        }
    }
    if (found) {
        const std::array<double, kNumClasses> right{node[0] - best_left[0], node[1] - best_left[1]};
        out.left_label = best_left[1] > best_left[0] ? Label::ChatGPT : Label::Human;
        out.right_label = right[1] > right[0] ? Label::ChatGPT : Label::Human;
    }
    return found;
}

BoostedModel fit_adaboost(const SparseMatrix& x, std::span<const Label> y, std::size_t n_rounds, std::uint64_t seed,
                          BoostingTrace* trace) {
    check_training_data(x, y);
    constexpr double kMinError = 1e-10;

    BoostedModel model;
    model.n_rounds = n_rounds;
    model.n_features = x.n_cols;
    model.seed = seed;

    const auto n = x.n_rows();
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    for (std::size_t round = 0; round < n_rounds; ++round) {
        Stump stump;
        if (!best_weighted_stump(x, y, weights, stump)) break;

        std::vector<bool> wrong(n);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            wrong[i] = stump.classify(x.rows[i]) != y[i];
            if (wrong[i]) err += weights[i];
        }
        if (trace) trace->errors.push_back(err);
        if (err >= 0.5) break;

        const double clipped = std::max(err, kMinError);
        stump.alpha = 0.5 * std::log((1.0 - clipped) / clipped);
        model.stumps.push_back(stump);

        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // exp(-alpha * y * h): y * h is -1 exactly when the stump is wrong.
            weights[i] *= std::exp(wrong[i] ? stump.alpha : -stump.alpha);
            sum += weights[i];
        }
        for (auto& w : weights) w /= sum;
        if (trace) trace->weights.push_back(weights);
        if (err <= kMinError) break;
    }
    return model;
}

double adaboost_margin(const BoostedModel& model, const SparseVector& row) noexcept {
    double margin = 0.0;
    for (const auto& s : model.stumps) margin += s.alpha * sign_of(s.classify(row));
    return margin;
}

Label adaboost_predict(const BoostedModel& model, const SparseVector& row) noexcept {
    return adaboost_margin(model, row) > 0.0 ? Label::ChatGPT : Label::Human;
}

double adaboost_score(const BoostedModel& model, const SparseVector& row) noexcept {
    double total = 0.0;
    double positive = 0.0;
    for (const auto& s : model.stumps) {
        total += s.alpha;
        if (s.classify(row) == Label::ChatGPT) positive += s.alpha;
    }
    return total > 0.0 ? positive / total : 0.5;
}

nlohmann::json to_json(const BoostedModel& model) {
    nlohmann::json stumps = nlohmann::json::array();
    for (const auto& s : model.stumps) {
        stumps.push_back({{"feature", s.feature},
                          {"threshold", s.threshold},
                          {"left_label", index_of(s.left_label)},
                          {"right_label", index_of(s.right_label)},
                          {"alpha", s.alpha}});
    }
    return {{"n_rounds", model.n_rounds}, {"n_features", model.n_features}, {"seed", model.seed}, {"stumps", stumps}};
}

BoostedModel boosted_from_json(const nlohmann::json& j) {
    BoostedModel m;
    m.n_rounds = j.at("n_rounds").get<std::size_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("stumps")) {
        Stump stump;
        stump.feature = s.at("feature").get<FeatureIndex>();
        stump.threshold = s.at("threshold").get<double>();
        stump.left_label = s.at("left_label").get<int>() == 1 ? Label::ChatGPT : Label::Human;
        stump.right_label = s.at("right_label").get<int>() == 1 ? Label::ChatGPT : Label::Human;
        stump.alpha = s.at("alpha").get<double>();
        if (!std::isfinite(stump.alpha)) throw std::invalid_argument("non-finite stump weight");
        if (stump.feature >= m.n_features) throw std::invalid_argument("stump feature outside the feature range");
        m.stumps.push_back(stump);
    }
    return m;
}

}  // namespace detect
