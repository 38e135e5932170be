#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "detect/classifier.hpp"
#include "detect/corpus.hpp"
#include "detect/metrics.hpp"
#include "detect/vectorizer.hpp"

namespace detect {

inline constexpr int kBundleSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

/// Everything that determines an experiment's output. Reports embed it verbatim.
struct ExperimentConfig {
    std::string data;
    CsvColumns columns;
    std::vector<std::string> human_labels = {"human", "0"};
    std::vector<std::string> chatgpt_labels = {"chatgpt", "1"};
    std::uint64_t seed = 42;
    double split = 0.8;
    bool balance = true;
    VectorizerConfig vectorizer;
    std::string model = "extra-trees";
    ModelOptions options;

    LabelMapping label_mapping() const;
    nlohmann::json to_json() const;
};

/// 16 hex digits of FNV-1a over the compact JSON dump.
std::string config_hash(const nlohmann::json& config);

/// Undersample (when enabled) then stratified split. Balancing and splitting
/// draw from independent streams derived from `seed`.
struct PreparedData {
    ClassCounts before{};
    LabeledCorpus balanced;
    SplitCorpus split;
};
PreparedData prepare_corpus(const LabeledCorpus& corpus, bool balance, double ratio, std::uint64_t seed);

/// Vectorizer + classifier + the config and training-set fingerprint that produced them.
struct Bundle {
    nlohmann::json config;
    VectorizerModel vectorizer;
    Classifier classifier;
    std::uint64_t train_fingerprint = 0;
};

/// Fits the vectorizer on `train` only, then the classifier on its features.
Bundle train_bundle(const LabeledCorpus& train, ModelKind kind, const ModelOptions& options,
                    const VectorizerConfig& vectorizer, nlohmann::json config);

nlohmann::json to_json(const Bundle& bundle);
/// Checks schema version, vocabulary hash and feature count; throws BundleError.
Bundle bundle_from_json(const nlohmann::json& j);
void save_bundle(const std::filesystem::path& path, const Bundle& bundle);
Bundle load_bundle(const std::filesystem::path& path);

struct Evaluation {
    MetricsReport metrics;
    std::vector<double> scores;
    std::vector<Label> predicted;
    double seconds = 0.0;
};

/// Throws LeakError when `test` has the bundle's training fingerprint.
Evaluation evaluate_bundle(const Bundle& bundle, const LabeledCorpus& test, std::size_t jobs = 1);

struct ModelRow {
    ModelRow() = default;
    explicit ModelRow(std::string model) : name(std::move(model)) {}

    std::string name;
    bool implemented = true;
    std::optional<std::string> error;
    /// One report per repeat.
    std::vector<MetricsReport> runs;
    double train_seconds = 0.0;
    double eval_seconds = 0.0;

    double mean(double MetricsReport::*field) const;
    double stddev(double MetricsReport::*field) const;
    double mean_auc() const;
};

struct Comparison {
    std::vector<ModelRow> rows;  // sorted by mean MCC, then name; unavailable rows last
    nlohmann::json dataset;
    std::size_t repeats = 1;
};

/// Fits every model on each split with one shared vectorizer per split. A
/// model that throws is reported on its row; the others still run.
Comparison compare_models(const std::vector<SplitCorpus>& splits, const VectorizerConfig& vectorizer,
                          const std::vector<ModelKind>& models, const ModelOptions& options,
                          bool list_unimplemented);

/// Fixed-width text table: Model, Accuracy, Precision, Recall, F1, MCC, AUC.
std::string render_table(const Comparison& comparison);
nlohmann::json to_json(const Comparison& comparison, bool include_roc = false);

}  // namespace detect
