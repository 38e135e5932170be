#include "detect/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "detect/error.hpp"
#include "detect/pipeline.hpp"

namespace detect::cli {

namespace fs = std::filesystem;

namespace {

struct DataFlags {
    std::string data;
    std::string text_column = "text";
    std::string label_column = "label";
    std::string id_column;
    std::vector<std::string> human_labels = {"human", "0"};
    std::vector<std::string> chatgpt_labels = {"chatgpt", "1"};
};

struct ModelFlags {
    std::string model = "extra-trees";
    std::optional<std::size_t> trees;
    std::size_t k = 5;
    std::size_t rounds = 50;
    double learning_rate = 0.1;
    std::size_t epochs = 300;
    double l2 = 1e-4;
    std::optional<std::size_t> max_depth;
    std::optional<std::size_t> min_samples_split;
    std::optional<std::size_t> max_vocab;
    std::size_t jobs = 0;
};

void add_data_flags(CLI::App& cmd, DataFlags& f, bool required) {
    auto* data = cmd.add_option("--data", f.data, "Input CSV (header row, RFC 4180 quoting)");
    if (required) data->required();
    cmd.add_option("--text-column", f.text_column, "Column holding the text")->capture_default_str();
    cmd.add_option("--label-column", f.label_column, "Column holding the label")->capture_default_str();
    cmd.add_option("--id-column", f.id_column, "Optional column with a document id");
    cmd.add_option("--human-labels", f.human_labels, "Label values meaning human-written")
        ->delimiter(',')
        ->capture_default_str();
    cmd.add_option("--chatgpt-labels", f.chatgpt_labels, "Label values meaning ChatGPT-generated")
        ->delimiter(',')
        ->capture_default_str();
}

void add_model_flags(CLI::App& cmd, ModelFlags& f, bool with_model_name) {
    if (with_model_name) cmd.add_option("--model", f.model, "Model to train")->capture_default_str();
    cmd.add_option("--trees", f.trees, "Trees per ensemble (default: 50 extra-trees, 100 random-forest, 10 bagging)");
    cmd.add_option("--k", f.k, "Neighbours for knn (odd)")->capture_default_str();
    cmd.add_option("--rounds", f.rounds, "AdaBoost rounds")->capture_default_str();
    cmd.add_option("--lr", f.learning_rate, "Logistic regression learning rate")->capture_default_str();
    cmd.add_option("--epochs", f.epochs, "Logistic regression epochs")->capture_default_str();
    cmd.add_option("--l2", f.l2, "Logistic regression L2 strength")->capture_default_str();
    cmd.add_option("--max-depth", f.max_depth, "Optional tree depth limit (default: unlimited)");
    cmd.add_option("--min-samples-split", f.min_samples_split, "Optional minimum node size to split");
    cmd.add_option("--max-vocab", f.max_vocab, "Keep only the most frequent terms (default: uncapped)");
    cmd.add_option("--jobs", f.jobs, "Worker threads (0 = all cores); results do not depend on it");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("DETECT_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw InputError(std::string("DETECT_SEED is not an unsigned integer: ") + env);
    }
    return 42;
}

ExperimentConfig make_config(const DataFlags& d, const ModelFlags& m, std::uint64_t seed, double split,
                             bool balance) {
    ExperimentConfig c;
    c.data = d.data;
    c.columns.text = d.text_column;
    c.columns.label = d.label_column;
    if (!d.id_column.empty()) c.columns.source_id = d.id_column;
    c.human_labels = d.human_labels;
    c.chatgpt_labels = d.chatgpt_labels;
    c.seed = seed;
    c.split = split;
    c.balance = balance;
    c.vectorizer.max_vocab = m.max_vocab;
    c.model = m.model;
    c.options.trees = m.trees;
    c.options.k = m.k;
    c.options.rounds = m.rounds;
    c.options.logistic.learning_rate = m.learning_rate;
    c.options.logistic.epochs = m.epochs;
    c.options.logistic.l2 = m.l2;
    c.options.max_depth = m.max_depth;
    c.options.min_samples_split = m.min_samples_split;
    c.options.seed = seed;
    c.options.jobs = m.jobs;
    return c;
}

LabeledCorpus load(const std::string& path, const ExperimentConfig& c) {
    return load_csv(path, c.columns, c.label_mapping());
}

ModelKind require_model(const std::string& name) {
    if (const auto kind = parse_model_name(name)) return *kind;
    std::string valid;
    for (const auto k : implemented_models()) valid += (valid.empty() ? "" : ", ") + std::string(model_name(k));
    throw InputError("unknown model '" + name + "'; valid models: " + valid);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << j.dump(2) << '\n';
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

// ------------------------------------------------------------- commands

int cmd_prepare(const DataFlags& d, std::optional<std::uint64_t> seed_flag, double split, bool no_balance,
                const std::string& out_dir, std::ostream& out) {
    const auto config = make_config(d, ModelFlags{}, resolve_seed(seed_flag), split, !no_balance);
    const auto corpus = load(d.data, config);
    const auto prepared = prepare_corpus(corpus, config.balance, config.split, config.seed);

    ensure_dir(out_dir);
    write_csv(fs::path(out_dir) / "train.csv", prepared.split.train);
    write_csv(fs::path(out_dir) / "test.csv", prepared.split.test);
    auto summary = corpus_summary(prepared.balanced, config.balance, config.seed);
    summary["before_balance"] = counts_json(prepared.before);
    summary["after_balance"] = counts_json(prepared.balanced.class_counts());
    summary["ratio"] = config.split;
    summary["stratified"] = true;
    summary["train"] = counts_json(prepared.split.train.class_counts());
    summary["test"] = counts_json(prepared.split.test.class_counts());
    write_json(fs::path(out_dir) / "summary.json", summary);
    out << summary.dump(2) << '\n';
    return kSuccess;
}

int cmd_train(const DataFlags& d, const ModelFlags& m, std::optional<std::uint64_t> seed_flag,
              const std::string& out_path, std::ostream& out) {
    const auto kind = require_model(m.model);
    const auto config = make_config(d, m, resolve_seed(seed_flag), 0.8, false);
    const auto train = load(d.data, config);
    const auto start = std::chrono::steady_clock::now();
    auto config_json = config.to_json();
    config_json.erase("split");
    config_json.erase("balance");
    config_json.erase("stratified");
    const auto bundle = train_bundle(train, kind, config.options, config.vectorizer, config_json);
    save_bundle(out_path, bundle);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << "trained " << model_name(kind) << " on " << train.size() << " documents, vocabulary "
        << bundle.vectorizer.vocabulary_size() << " terms, " << secs << " s -> " << out_path << '\n';
    return kSuccess;
}

int cmd_evaluate(const DataFlags& d, const std::string& bundle_path, const std::string& out_dir, std::size_t jobs,
                 std::ostream& out) {
    const auto bundle = load_bundle(bundle_path);
    const auto config = make_config(d, ModelFlags{}, 0, 0.8, false);
    const auto test = load(d.data, config);
    const auto ev = evaluate_bundle(bundle, test, jobs);

    const auto name = std::string(model_name(kind_of(bundle.classifier)));
    Comparison single;
    ModelRow row(name);
    row.runs.push_back(ev.metrics);
    row.eval_seconds = ev.seconds;
    single.rows.push_back(std::move(row));
    out << render_table(single);

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        nlohmann::json report = {{"schema_version", kReportSchemaVersion},
                                 {"command", "evaluate"},
                                 {"config", bundle.config},
                                 {"config_hash", config_hash(bundle.config)},
                                 {"model", name},
                                 {"dataset", {{"path", d.data}, {"n_total", test.size()},
                                              {"n_per_class", counts_json(test.class_counts())}}},
                                 {"metrics", to_json(ev.metrics)},
                                 {"durations", {{"eval_seconds", ev.seconds}}}};
        write_json(fs::path(out_dir) / "report.json", report);
        if (!ev.metrics.roc.empty()) write_roc_csv(fs::path(out_dir) / "roc.csv", ev.metrics.roc);
    }
    return kSuccess;
}

int cmd_compare(const DataFlags& d, const ModelFlags& m, std::optional<std::uint64_t> seed_flag, double split,
                bool no_balance, const std::string& train_path, const std::string& test_path,
                const std::vector<std::string>& model_names, std::size_t repeats, const std::string& out_dir,
                std::ostream& out) {
    if (repeats < 1) throw InputError("--repeats must be at least 1");
    auto config = make_config(d, m, resolve_seed(seed_flag), split, !no_balance);

    std::vector<ModelKind> kinds;
    bool list_unimplemented = model_names.empty();
    std::vector<std::string> requested_unimplemented;
    if (model_names.empty()) {
        kinds = implemented_models();
    } else {
        for (const auto& name : model_names) {
            const auto& missing = unimplemented_model_names();
            if (std::find(missing.begin(), missing.end(), name) != missing.end()) {
                requested_unimplemented.push_back(name);
                continue;
            }
            kinds.push_back(require_model(name));
        }
    }

    std::vector<SplitCorpus> splits;
    nlohmann::json before;
    if (!train_path.empty() || !test_path.empty()) {
        if (train_path.empty() || test_path.empty()) throw InputError("--train and --test must be given together");
        if (repeats > 1) throw InputError("--repeats needs --data so each repeat can draw its own split");
        auto train = load(train_path, config);
        auto test = load(test_path, config);
        const double ratio = static_cast<double>(train.size()) / static_cast<double>(train.size() + test.size());
        splits.push_back(SplitCorpus{std::move(train), std::move(test), config.seed, ratio});
        config.data = train_path + "," + test_path;
        config.balance = false;
    } else {
        if (d.data.empty()) throw InputError("compare needs --data, or --train with --test");
        const auto corpus = load(d.data, config);
        before = counts_json(corpus.class_counts());
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto seed = r == 0 ? config.seed : derive_seed(config.seed, 1000 + r);
            splits.push_back(prepare_corpus(corpus, config.balance, config.split, seed).split);
        }
    }

    auto cmp = compare_models(splits, config.vectorizer, kinds, config.options, list_unimplemented);
    for (const auto& name : requested_unimplemented) {
        ModelRow row(name);
        row.implemented = false;
        cmp.rows.push_back(std::move(row));
    }
    out << render_table(cmp);

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        auto config_json = config.to_json();
        config_json["model"] = nullptr;
        config_json["repeats"] = repeats;
        auto report = to_json(cmp);
        report["schema_version"] = kReportSchemaVersion;
        report["command"] = "compare";
        report["config"] = config_json;
        report["config_hash"] = config_hash(config_json);
        if (!before.is_null()) report["dataset"]["before_balance"] = before;
        write_json(fs::path(out_dir) / "report.json", report);
        for (const auto& row : cmp.rows) {
            if (row.runs.empty() || row.runs.front().roc.empty()) continue;
            write_roc_csv(fs::path(out_dir) / ("roc_" + row.name + ".csv"), row.runs.front().roc);
        }
    }
    return kSuccess;
}

int cmd_predict(const std::string& bundle_path, const std::vector<std::string>& texts, const std::string& input,
                std::ostream& out, std::ostream& err) {
    const auto bundle = load_bundle(bundle_path);
    std::vector<std::pair<std::string, std::string>> items;  // (id, text)
    for (std::size_t i = 0; i < texts.size(); ++i) items.emplace_back(std::to_string(i), texts[i]);
    if (!input.empty()) {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw InputError("cannot open file: " + input);
        std::string line;
        for (std::size_t n = 1; std::getline(in, line); ++n) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            items.emplace_back(input + ":" + std::to_string(n), line);
        }
    }
    if (items.empty()) throw InputError("predict needs --text or --input");

    int status = kSuccess;
    for (const auto& [id, text] : items) {
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
            out << nlohmann::json{{"text_id", id}, {"error", "empty text"}}.dump() << '\n';
            err << "error: text " << id << " is empty\n";
            status = kInputError;
            continue;
        }
        SparseMatrix x;
        x.n_cols = bundle.vectorizer.vocabulary_size();
        x.rows.push_back(transform(text, bundle.vectorizer));
        const double score = classifier_scores(bundle.classifier, x).front();
        const auto label = classifier_labels(bundle.classifier, x).front();
        out << nlohmann::json{{"text_id", id},
                              {"label", to_string(label)},
                              {"score", score},
                              {"oov", all_out_of_vocabulary(text, bundle.vectorizer)}}
                   .dump()
            << '\n';
    }
    return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Human vs. ChatGPT text detection: TF-IDF features with tree ensembles and baselines", "detect"};
    app.require_subcommand(1);

    DataFlags data;
    ModelFlags model;
    std::optional<std::uint64_t> seed;
    double split = 0.8;
    bool no_balance = false;
    std::string out_path;
    std::string bundle_path;
    std::string train_path;
    std::string test_path;
    std::string input_path;
    std::vector<std::string> texts;
    std::vector<std::string> models;
    std::size_t repeats = 1;

    auto* prepare = app.add_subcommand("prepare", "Balance and split a labeled CSV into train.csv and test.csv");
    add_data_flags(*prepare, data, true);
    prepare->add_option("--seed", seed, "Random seed (fallback: $DETECT_SEED, then 42)");
    prepare->add_option("--split", split, "Training fraction")->capture_default_str();
    prepare->add_flag("--no-balance", no_balance, "Skip undersampling");
    prepare->add_option("--out", out_path, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Fit the vectorizer and a classifier; write a model bundle");
    add_data_flags(*train, data, true);
    add_model_flags(*train, model, true);
    train->add_option("--seed", seed, "Random seed (fallback: $DETECT_SEED, then 42)");
    train->add_option("--out", out_path, "Bundle file to write")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Score a bundle on a labeled test CSV");
    add_data_flags(*evaluate, data, true);
    evaluate->add_option("--bundle", bundle_path, "Model bundle")->required();
    evaluate->add_option("--out", out_path, "Directory for report.json and roc.csv");
    evaluate->add_option("--jobs", model.jobs, "Worker threads (0 = all cores)");

    auto* compare = app.add_subcommand("compare", "Train and evaluate every model on one shared split");
    add_data_flags(*compare, data, false);
    add_model_flags(*compare, model, false);
    compare->add_option("--seed", seed, "Random seed (fallback: $DETECT_SEED, then 42)");
    compare->add_option("--split", split, "Training fraction")->capture_default_str();
    compare->add_flag("--no-balance", no_balance, "Skip undersampling");
    compare->add_option("--train", train_path, "Prepared training CSV (instead of --data)");
    compare->add_option("--test", test_path, "Prepared test CSV (instead of --data)");
    compare->add_option("--models", models, "Comma-separated subset of models")->delimiter(',');
    compare->add_option("--repeats", repeats, "Independent seeded splits; reports mean and std")
        ->capture_default_str();
    compare->add_option("--out", out_path, "Directory for report.json and roc_<model>.csv");

    std::size_t n_per_class = 500;
    auto* synthesize = app.add_subcommand("synthesize", "Write the separable synthetic fixture corpus as CSV");
    synthesize->add_option("--n-per-class", n_per_class, "Documents per class")->capture_default_str();
    synthesize->add_option("--seed", seed, "Random seed (fallback: $DETECT_SEED, then 42)");
    synthesize->add_option("--out", out_path, "CSV file to write")->required();

    auto* predict = app.add_subcommand("predict", "Label texts with a trained bundle (JSON lines)");
    predict->add_option("--bundle", bundle_path, "Model bundle")->required();
    predict->add_option("--text", texts, "Text to score (repeatable)");
    predict->add_option("--input", input_path, "File with one text per line");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (*prepare) return cmd_prepare(data, seed, split, no_balance, out_path, out);
        if (*train) return cmd_train(data, model, seed, out_path, out);
        if (*evaluate) return cmd_evaluate(data, bundle_path, out_path, model.jobs, out);
        if (*compare) {
            return cmd_compare(data, model, seed, split, no_balance, train_path, test_path, models, repeats,
                               out_path, out);
        }
        if (*synthesize) {
            const auto corpus = synthesize_corpus(n_per_class, resolve_seed(seed));
            write_csv(out_path, corpus);
            out << corpus_summary(corpus, false, resolve_seed(seed)).dump() << '\n';
            return kSuccess;
        }
        if (*predict) return cmd_predict(bundle_path, texts, input_path, out, err);
    } catch (const LeakError& e) {
        err << "error: " << e.what() << '\n';
        return kLeakDetected;
    } catch (const BundleError& e) {
        err << "error: " << e.what() << '\n';
        return kBundleError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kInternalError;
}

}  // namespace detect::cli
