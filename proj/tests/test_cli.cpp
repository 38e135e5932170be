#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "detect/cli.hpp"
#include "detect/corpus.hpp"
#include "detect/csv.hpp"
#include "detect/metrics.hpp"
#include "detect/pipeline.hpp"

using namespace detect;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "detect");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "detect_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> table_rows(const std::string& table) {
    std::vector<std::string> rows;
    std::istringstream in(table);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(line.substr(0, line.find(' ')));
    }
    return rows;
}

/// Writes a synthetic corpus to `dir`/name and returns its path.
std::string synthetic_csv(const fs::path& dir, std::size_t n_per_class, std::uint64_t seed,
                          const std::string& name = "data.csv") {
    const auto path = (dir / name).string();
    REQUIRE(run({"synthesize", "--n-per-class", std::to_string(n_per_class), "--seed", std::to_string(seed), "--out",
                 path})
                .code == 0);
    return path;
}

}  // namespace

TEST_CASE("prepare balances a 1:8 corpus") {
    const auto dir = scratch("prepare");
    LabeledCorpus c;
    for (int i = 0; i < 90; ++i) {
        c.push_back({"document number " + std::to_string(i), std::nullopt}, i % 9 == 0 ? Label::Human : Label::ChatGPT);
    }
    write_csv(dir / "skewed.csv", c);

    const auto r = run({"prepare", "--data", (dir / "skewed.csv").string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
    CHECK(summary["before_balance"]["human"] == 10);
    CHECK(summary["before_balance"]["chatgpt"] == 80);
    CHECK(summary["after_balance"]["human"] == 10);
    CHECK(summary["after_balance"]["chatgpt"] == 10);
    const auto train = load_csv(dir / "out" / "train.csv", {}, default_label_mapping());
    const auto test = load_csv(dir / "out" / "test.csv", {}, default_label_mapping());
    CHECK(train.class_counts() == ClassCounts{8, 8});
    CHECK(test.class_counts() == ClassCounts{2, 2});

    const auto kept = run({"prepare", "--data", (dir / "skewed.csv").string(), "--no-balance", "--out",
                           (dir / "raw").string()});
    REQUIRE(kept.code == 0);
    const auto raw = nlohmann::json::parse(slurp(dir / "raw" / "summary.json"));
    CHECK(raw["after_balance"]["chatgpt"] == 80);
    CHECK(load_csv(dir / "raw" / "train.csv", {}, default_label_mapping()).size() == 72);
}

TEST_CASE("prepare leaves a balanced corpus alone and reports input errors") {
    const auto dir = scratch("prepare_balanced");
    const auto data = synthetic_csv(dir, 20, 1);
    REQUIRE(run({"prepare", "--data", data, "--out", (dir / "out").string()}).code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
    CHECK(summary["after_balance"] == summary["before_balance"]);

    CHECK(run({"prepare", "--data", (dir / "missing.csv").string(), "--out", (dir / "x").string()}).code == 2);
    CHECK(run({"prepare", "--bogus-flag"}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("train is deterministic and validates the model name") {
    const auto dir = scratch("train");
    const auto data = synthetic_csv(dir, 40, 2);
    for (const auto* model : {"extra-trees", "random-forest", "adaboost", "logistic-regression"}) {
        const auto a = (dir / (std::string(model) + "_a.json")).string();
        const auto b = (dir / (std::string(model) + "_b.json")).string();
        REQUIRE(run({"train", "--data", data, "--model", model, "--seed", "42", "--out", a}).code == 0);
        REQUIRE(run({"train", "--data", data, "--model", model, "--seed", "42", "--jobs", "3", "--out", b}).code == 0);
        CHECK(slurp(a) == slurp(b));
    }

    const auto bad = run({"train", "--data", data, "--model", "gpt-zero", "--out", (dir / "x.json").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("extra-trees") != std::string::npos);
    CHECK(bad.err.find("knn") != std::string::npos);

    const auto knn = (dir / "knn.json").string();
    REQUIRE(run({"train", "--data", data, "--model", "knn", "--k", "5", "--out", knn}).code == 0);
    const auto bundle = nlohmann::json::parse(slurp(knn));
    CHECK(bundle["classifier"]["kind"] == "knn");
    CHECK(bundle["classifier"]["model"]["k"] == 5);

    const auto ert = (dir / "ert.json").string();
    REQUIRE(run({"train", "--data", data, "--model", "extra-trees", "--trees", "7", "--out", ert}).code == 0);
    CHECK(nlohmann::json::parse(slurp(ert))["classifier"]["model"]["trees"].size() == 7);
}

TEST_CASE("DETECT_SEED is the seed fallback") {
    const auto dir = scratch("seed");
    const auto data = synthetic_csv(dir, 30, 3);
    ::setenv("DETECT_SEED", "7", 1);
    REQUIRE(run({"train", "--data", data, "--model", "extra-trees", "--trees", "3", "--out",
                 (dir / "env.json").string()})
                .code == 0);
    ::unsetenv("DETECT_SEED");
    REQUIRE(run({"train", "--data", data, "--model", "extra-trees", "--trees", "3", "--seed", "7", "--out",
                 (dir / "flag.json").string()})
                .code == 0);
    REQUIRE(run({"train", "--data", data, "--model", "extra-trees", "--trees", "3", "--out",
                 (dir / "default.json").string()})
                .code == 0);
    CHECK(slurp(dir / "env.json") == slurp(dir / "flag.json"));
    CHECK(slurp(dir / "env.json") != slurp(dir / "default.json"));
}

TEST_CASE("evaluate reports module metrics and guards the bundle") {
    const auto dir = scratch("evaluate");
    const auto data = synthetic_csv(dir, 60, 4);
    REQUIRE(run({"prepare", "--data", data, "--out", (dir / "prep").string()}).code == 0);
    const auto train_csv = (dir / "prep" / "train.csv").string();
    const auto test_csv = (dir / "prep" / "test.csv").string();
    const auto bundle_path = (dir / "bundle.json").string();
    REQUIRE(run({"train", "--data", train_csv, "--model", "extra-trees", "--out", bundle_path}).code == 0);

    const auto r = run({"evaluate", "--bundle", bundle_path, "--data", test_csv, "--out", (dir / "eval").string()});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "eval" / "report.json"));
    const auto bundle_json = nlohmann::json::parse(slurp(bundle_path));
    CHECK(report["config_hash"] == bundle_json["config_hash"]);
    CHECK(fs::exists(dir / "eval" / "roc.csv"));

    // Recompute through the module API.
    const auto bundle = load_bundle(bundle_path);
    const auto test = load_csv(test_csv, {}, default_label_mapping());
    const auto ev = evaluate_bundle(bundle, test, 1);
    const auto direct = compute_metrics(confusion(test.labels, ev.predicted));
    CHECK(report["metrics"]["accuracy"].get<double>() == direct.accuracy);
    CHECK(report["metrics"]["mcc"].get<double>() == direct.mcc);
    CHECK(report["metrics"]["f1"].get<double>() == direct.f1);
    CHECK(report["metrics"]["accuracy"].get<double>() == 1.0);

    SUBCASE("leak guard") {
        const auto leak = run({"evaluate", "--bundle", bundle_path, "--data", train_csv});
        CHECK(leak.code == 3);
        CHECK(leak.err.find("training") != std::string::npos);
    }
    SUBCASE("tampered bundle") {
        auto j = bundle_json;
        j["vectorizer"]["terms"][0]["df"] = j["vectorizer"]["terms"][0]["df"].get<int>() + 1;
        j["vectorizer"]["terms"][0]["idf"] = 0.5;
        std::ofstream(dir / "tampered.json") << j.dump();
        CHECK(run({"evaluate", "--bundle", (dir / "tampered.json").string(), "--data", test_csv}).code == 4);

        std::ofstream(dir / "truncated.json") << slurp(bundle_path).substr(0, 100);
        CHECK(run({"evaluate", "--bundle", (dir / "truncated.json").string(), "--data", test_csv}).code == 4);

        auto wrong_version = bundle_json;
        wrong_version["schema_version"] = 99;
        std::ofstream(dir / "version.json") << wrong_version.dump();
        CHECK(run({"evaluate", "--bundle", (dir / "version.json").string(), "--data", test_csv}).code == 4);
    }
}

TEST_CASE("compare lists every model and filters on request") {
    const auto dir = scratch("compare");
    const auto data = synthetic_csv(dir, 40, 5);
    const auto full = run({"compare", "--data", data, "--trees", "10", "--out", (dir / "out").string()});
    REQUIRE(full.code == 0);
    const auto rows = table_rows(full.out);
    CHECK(rows.size() == 11);
    for (const auto* name : {"svm", "gradient-boosting", "mlp", "lstm"}) {
        CHECK(std::count(rows.begin(), rows.end(), name) == 1);
    }
    CHECK(full.out.find("not implemented") != std::string::npos);
    for (const auto* name : {"extra-trees", "random-forest", "bagging", "decision-tree", "adaboost",
                             "logistic-regression", "knn"}) {
        CHECK(fs::exists(dir / "out" / ("roc_" + std::string(name) + ".csv")));
    }
    const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
    CHECK(report["command"] == "compare");

    const auto two = run({"compare", "--data", data, "--models", "extra-trees,random-forest", "--trees", "10"});
    REQUIRE(two.code == 0);
    const auto two_rows = table_rows(two.out);
    CHECK(two_rows.size() == 2);

    const auto again = run({"compare", "--data", data, "--models", "extra-trees,random-forest", "--trees", "10"});
    CHECK(again.out == two.out);

    CHECK(run({"compare", "--data", data, "--models", "nonsense"}).code == 2);
}

TEST_CASE("compare on prepared halves and with repeats") {
    const auto dir = scratch("compare_split");
    const auto data = synthetic_csv(dir, 40, 6);
    REQUIRE(run({"prepare", "--data", data, "--out", (dir / "prep").string()}).code == 0);
    const auto r = run({"compare", "--train", (dir / "prep" / "train.csv").string(), "--test",
                        (dir / "prep" / "test.csv").string(), "--models", "knn"});
    CHECK(r.code == 0);
    CHECK(table_rows(r.out).size() == 1);

    const auto rep = run({"compare", "--data", data, "--models", "decision-tree", "--repeats", "3", "--out",
                          (dir / "rep").string()});
    REQUIRE(rep.code == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "rep" / "report.json"));
    CHECK(report["config"]["repeats"] == 3);
}

TEST_CASE("predict") {
    const auto dir = scratch("predict");
    const auto data = synthetic_csv(dir, 100, 7);
    const auto bundle = (dir / "bundle.json").string();
    REQUIRE(run({"train", "--data", data, "--model", "extra-trees", "--out", bundle}).code == 0);

    const auto r = run({"predict", "--bundle", bundle, "--text", "furthermore additionally moreover",
                        "--text", "honestly lol gonna", "--text", "qqq zzz"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::vector<nlohmann::json> rows;
    for (std::string line; std::getline(lines, line);) rows.push_back(nlohmann::json::parse(line));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]["label"] == "chatgpt");
    CHECK(rows[0]["oov"] == false);
    CHECK(rows[1]["label"] == "human");
    CHECK(rows[2]["oov"] == true);
    for (const auto& row : rows) {
        CHECK(row["score"].get<double>() >= 0.0);
        CHECK(row["score"].get<double>() <= 1.0);
        CHECK(row.contains("text_id"));
    }

    const auto empty = run({"predict", "--bundle", bundle, "--text", ""});
    CHECK(empty.code == 2);
    CHECK(empty.out.find("empty text") != std::string::npos);

    std::ofstream(dir / "texts.txt") << "furthermore the data\n\nhonestly lol\n";
    const auto file = run({"predict", "--bundle", bundle, "--input", (dir / "texts.txt").string()});
    CHECK(file.code == 2);
    CHECK(std::count(file.out.begin(), file.out.end(), '\n') == 3);
}
