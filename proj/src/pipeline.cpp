#include "detect/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "detect/error.hpp"
#include "detect/rng.hpp"

namespace detect {

namespace {

constexpr std::uint64_t kBalanceStream = 1;
constexpr std::uint64_t kSplitStream = 2;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

LabelMapping ExperimentConfig::label_mapping() const {
    LabelMapping mapping;
    for (const auto& v : human_labels) mapping.emplace(v, Label::Human);
    for (const auto& v : chatgpt_labels) {
        if (mapping.contains(v)) throw InputError("label value '" + v + "' is mapped to both classes");
        mapping.emplace(v, Label::ChatGPT);
    }
    return mapping;
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"data", data},
            {"text_column", columns.text},
            {"label_column", columns.label},
            {"id_column", columns.source_id ? nlohmann::json(*columns.source_id) : nlohmann::json(nullptr)},
            {"human_labels", human_labels},
            {"chatgpt_labels", chatgpt_labels},
            {"seed", seed},
            {"split", split},
            {"stratified", true},
            {"balance", balance},
            {"vectorizer",
             {{"max_vocab", vectorizer.max_vocab ? nlohmann::json(*vectorizer.max_vocab) : nlohmann::json(nullptr)},
              {"log_base", "natural"}}},
            {"model", model},
            {"options", detect::to_json(options)}};
}

std::string config_hash(const nlohmann::json& config) { return hex64(fnv1a(config.dump())); }

PreparedData prepare_corpus(const LabeledCorpus& corpus, bool balance, double ratio, std::uint64_t seed) {
    PreparedData out;
    out.before = corpus.class_counts();
    out.balanced = balance ? undersample_balance(corpus, derive_seed(seed, kBalanceStream)) : corpus;
    out.split = stratified_split(out.balanced, ratio, derive_seed(seed, kSplitStream));
    out.split.seed = seed;
    return out;
}

Bundle train_bundle(const LabeledCorpus& train, ModelKind kind, const ModelOptions& options,
                    const VectorizerConfig& vectorizer, nlohmann::json config) {
    Bundle bundle{std::move(config), fit_vectorizer(train, vectorizer), {}, fingerprint(train)};
    const auto x = transform(train, bundle.vectorizer);
    bundle.classifier = fit_classifier(kind, options, x, train.labels);
    return bundle;
}

nlohmann::json to_json(const Bundle& bundle) {
    return {{"schema_version", kBundleSchemaVersion},
            {"config", bundle.config},
            {"config_hash", config_hash(bundle.config)},
            {"train_fingerprint", hex64(bundle.train_fingerprint)},
            {"vocabulary_hash", hex64(bundle.vectorizer.vocabulary_hash())},
            {"vectorizer", to_json(bundle.vectorizer)},
            {"classifier", to_json(bundle.classifier)}};
}

Bundle bundle_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema_version").get<int>() != kBundleSchemaVersion) {
            throw BundleError("unsupported bundle schema version " + j.at("schema_version").dump());
        }
        Bundle bundle;
        bundle.config = j.at("config");
        bundle.train_fingerprint = std::stoull(j.at("train_fingerprint").get<std::string>(), nullptr, 16);
        bundle.vectorizer = vectorizer_from_json(j.at("vectorizer"));
        if (hex64(bundle.vectorizer.vocabulary_hash()) != j.at("vocabulary_hash").get<std::string>()) {
            throw BundleError("vocabulary hash mismatch: bundle vectorizer was modified");
        }
        bundle.classifier = classifier_from_json(j.at("classifier"));
        if (feature_count(bundle.classifier) != bundle.vectorizer.vocabulary_size()) {
            throw BundleError("classifier expects " + std::to_string(feature_count(bundle.classifier)) +
                              " features but the vocabulary has " +
                              std::to_string(bundle.vectorizer.vocabulary_size()));
        }
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw BundleError(std::string("malformed bundle: ") + e.what());
    }
}

void save_bundle(const std::filesystem::path& path, const Bundle& bundle) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write bundle: " + path.string());
    out << to_json(bundle).dump() << '\n';
}

Bundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open bundle: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw BundleError("bundle is not valid JSON: " + std::string(e.what()));
    }
    return bundle_from_json(j);
}

Evaluation evaluate_bundle(const Bundle& bundle, const LabeledCorpus& test, std::size_t jobs) {
    if (test.empty()) throw InputError("evaluation set is empty");
    if (fingerprint(test) == bundle.train_fingerprint) {
        throw LeakError("evaluation data matches the bundle's training set fingerprint");
    }
    const auto start = std::chrono::steady_clock::now();
    const auto x = transform(test, bundle.vectorizer);
    Evaluation ev;
    ev.scores = classifier_scores(bundle.classifier, x, jobs);
    ev.predicted = classifier_labels(bundle.classifier, x, jobs);
    ev.metrics = evaluate(test.labels, ev.predicted, ev.scores);
    ev.seconds = seconds_since(start);
    return ev;
}

double ModelRow::mean(double MetricsReport::*field) const {
    if (runs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : runs) s += r.*field;
    return s / static_cast<double>(runs.size());
}

double ModelRow::stddev(double MetricsReport::*field) const {
    if (runs.size() < 2) return 0.0;
    const double m = mean(field);
    double s = 0.0;
    for (const auto& r : runs) s += (r.*field - m) * (r.*field - m);
    return std::sqrt(s / static_cast<double>(runs.size() - 1));
}

double ModelRow::mean_auc() const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : runs) {
        if (r.auc) {
            s += *r.auc;
            ++n;
        }
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

Comparison compare_models(const std::vector<SplitCorpus>& splits, const VectorizerConfig& vectorizer,
                          const std::vector<ModelKind>& models, const ModelOptions& options,
                          bool list_unimplemented) {
    if (splits.empty()) throw std::invalid_argument("comparison needs at least one split");
    Comparison cmp;
    cmp.repeats = splits.size();
    for (const auto kind : models) cmp.rows.emplace_back(std::string(model_name(kind)));

    for (std::size_t s = 0; s < splits.size(); ++s) {
        const auto& split = splits[s];
        const auto vec = fit_vectorizer(split.train, vectorizer);
        const auto x_train = transform(split.train, vec);
        const auto x_test = transform(split.test, vec);
        if (s == 0) {
            cmp.dataset = {{"train", counts_json(split.train.class_counts())},
                           {"test", counts_json(split.test.class_counts())},
                           {"vocabulary_size", vec.vocabulary_size()},
                           {"split", split.ratio},
                           {"seed", split.seed}};
        }
        for (std::size_t m = 0; m < models.size(); ++m) {
            auto& row = cmp.rows[m];
            if (row.error) continue;
            try {
                auto opts = options;
                opts.seed = split.seed;
                auto start = std::chrono::steady_clock::now();
                const auto model = fit_classifier(models[m], opts, x_train, split.train.labels);
                row.train_seconds += seconds_since(start);
                start = std::chrono::steady_clock::now();
                const auto scores = classifier_scores(model, x_test, options.jobs);
                const auto labels = classifier_labels(model, x_test, options.jobs);
                row.runs.push_back(evaluate(split.test.labels, labels, scores));
                row.eval_seconds += seconds_since(start);
            } catch (const std::exception& e) {
                row.error = e.what();
                row.runs.clear();
            }
        }
    }

    std::stable_sort(cmp.rows.begin(), cmp.rows.end(), [](const ModelRow& a, const ModelRow& b) {
        const bool a_ok = !a.error && !a.runs.empty();
        const bool b_ok = !b.error && !b.runs.empty();
        if (a_ok != b_ok) return a_ok;
        if (!a_ok) return a.name < b.name;
        const double ma = a.mean(&MetricsReport::mcc);
        const double mb = b.mean(&MetricsReport::mcc);
        return ma != mb ? ma > mb : a.name < b.name;
    });
    if (list_unimplemented) {
        for (const auto& name : unimplemented_model_names()) {
            ModelRow row(name);
            row.implemented = false;
            cmp.rows.push_back(std::move(row));
        }
    }
    return cmp;
}

std::string render_table(const Comparison& cmp) {
    std::ostringstream out;
    char line[512];
    std::snprintf(line, sizeof line, "%-22s %-16s %-16s %-16s %-16s %-16s %s\n", "Model", "Accuracy",
                  "Precision", "Recall", "F1", "MCC", "AUC");
    out << line;
    const bool spread = cmp.repeats > 1;
    auto cell = [&](const ModelRow& row, double MetricsReport::*field) {
        auto s = fixed(row.mean(field));
        if (spread) s += "±" + fixed(row.stddev(field), 3);
        return s;
    };
    for (const auto& row : cmp.rows) {
        if (!row.implemented) {
            std::snprintf(line, sizeof line, "%-22s not implemented\n", row.name.c_str());
        } else if (row.error) {
            std::snprintf(line, sizeof line, "%-22s failed: %s\n", row.name.c_str(), row.error->c_str());
        } else {
            std::snprintf(line, sizeof line, "%-22s %-16s %-16s %-16s %-16s %-16s %s\n", row.name.c_str(),
                          cell(row, &MetricsReport::accuracy).c_str(), cell(row, &MetricsReport::precision).c_str(),
                          cell(row, &MetricsReport::recall).c_str(), cell(row, &MetricsReport::f1).c_str(),
                          cell(row, &MetricsReport::mcc).c_str(), fixed(row.mean_auc()).c_str());
        }
        out << line;
    }
    return out.str();
}

nlohmann::json to_json(const Comparison& cmp, bool include_roc) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : cmp.rows) {
        nlohmann::json r = {{"model", row.name}};
        if (!row.implemented) {
            r["status"] = "not implemented";
        } else if (row.error) {
            r["status"] = "failed";
            r["error"] = *row.error;
        } else {
            r["status"] = "ok";
            nlohmann::json runs = nlohmann::json::array();
            for (const auto& run : row.runs) runs.push_back(to_json(run, include_roc));
            r["runs"] = std::move(runs);
            nlohmann::json summary;
            for (const auto& [name, field] :
                 {std::pair{"accuracy", &MetricsReport::accuracy}, std::pair{"precision", &MetricsReport::precision},
                  std::pair{"recall", &MetricsReport::recall}, std::pair{"f1", &MetricsReport::f1},
                  std::pair{"mcc", &MetricsReport::mcc}}) {
                summary[name] = {{"mean", row.mean(field)}, {"std", row.stddev(field)}};
            }
            summary["auc"] = {{"mean", row.mean_auc()}};
            r["summary"] = std::move(summary);
            r["durations"] = {{"train_seconds", row.train_seconds}, {"eval_seconds", row.eval_seconds}};
        }
        rows.push_back(std::move(r));
    }
    return {{"repeats", cmp.repeats}, {"dataset", cmp.dataset}, {"models", rows}};
}

}  // namespace detect
