#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "detect/error.hpp"
#include "detect/rng.hpp"
#include "detect/vectorizer.hpp"
#include "oracles.hpp"

using namespace detect;

namespace {

std::vector<Document> docs(std::initializer_list<const char*> texts) {
    std::vector<Document> out;
    for (const auto* t : texts) out.push_back({t, std::nullopt});
    return out;
}

/// Random corpora of up to 5 documents over up to 10 single-letter-ish terms.
std::vector<std::string> random_corpus(Rng& rng, std::size_t n_docs, std::size_t n_terms) {
    std::vector<std::string> out;
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::string text;
        const auto len = 1 + rng.below(8);
        for (std::size_t i = 0; i < len; ++i) {
            if (!text.empty()) text += ' ';
            text += "w" + std::to_string(rng.below(n_terms));
        }
        out.push_back(text);
    }
    return out;
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("Hello, world! HELLO") == TokenStream{"hello", "world", "hello"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("the cat and the hat") == TokenStream{"the", "cat", "and", "the", "hat"});
    CHECK(tokenize("don't  stop--2nd") == TokenStream{"don", "t", "stop", "2nd"});
    CHECK(tokenize("caf\xc3\xa9 ok") == TokenStream{"caf\xc3\xa9", "ok"});
}

TEST_CASE("term frequency") {
    CHECK(term_frequency("a", {"a"}) == 1.0);
    CHECK(term_frequency("a", {"a", "b", "a"}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(term_frequency("z", {"a", "b", "a"}) == 0.0);
    CHECK_THROWS_AS(term_frequency("a", {}), std::invalid_argument);
}

TEST_CASE("inverse document frequency") {
    const auto model = fit_vectorizer(docs({"a b", "a c", "a d", "a b"}));
    CHECK(inverse_document_frequency("a", model) == 0.0);
    CHECK(inverse_document_frequency("c", model) == 1.3862943611198906);
    CHECK(inverse_document_frequency("b", model) == 0.6931471805599453);
    CHECK_THROWS_AS(inverse_document_frequency("zzz", model), std::out_of_range);
}

TEST_CASE("fit_vectorizer examples") {
    const auto model = fit_vectorizer(docs({"a b", "b c"}));
    CHECK(model.n_documents() == 2);
    REQUIRE(model.vocabulary_size() == 3);
    CHECK(model.terms()[0].term == "a");
    CHECK(model.terms()[0].df == 1);
    CHECK(model.terms()[1].term == "b");
    CHECK(model.terms()[1].df == 2);
    CHECK(model.terms()[2].term == "c");
    CHECK(model.terms()[2].df == 1);

    const auto capped = fit_vectorizer(docs({"a b", "b c"}), {1});
    REQUIRE(capped.vocabulary_size() == 1);
    CHECK(capped.terms()[0].term == "b");

    const auto single = fit_vectorizer(docs({"x x x"}));
    REQUIRE(single.vocabulary_size() == 1);
    CHECK(single.terms()[0].idf == 0.0);

    CHECK_THROWS_AS(fit_vectorizer(std::vector<Document>{}), InputError);
    CHECK_THROWS_AS(fit_vectorizer(docs({"a"}), {0}), InputError);
}

TEST_CASE("cap ties break lexicographically") {
    const auto model = fit_vectorizer(docs({"d c b e", "a", "e"}), {3});
    REQUIRE(model.vocabulary_size() == 3);
    CHECK(model.terms()[0].term == "a");
    CHECK(model.terms()[1].term == "b");
    CHECK(model.terms()[2].term == "e");
}

TEST_CASE("transform examples") {
    const auto model = fit_vectorizer(docs({"a b", "b c"}));
    const auto aa = transform("a a", model);
    REQUIRE(aa.nnz() == 1);
    CHECK(aa.entries()[0].column == *model.index_of("a"));
    CHECK(aa.entries()[0].weight == 0.6931471805599453);
    CHECK(transform("b", model).empty());
    CHECK(transform("zzz", model).empty());
    CHECK(all_out_of_vocabulary("zzz", model));
    CHECK_FALSE(all_out_of_vocabulary("b", model));
    // OOV tokens still count toward document length.
    CHECK(transform("a zzz", model).at(*model.index_of("a")) == doctest::Approx(0.5 * std::log(2.0)));
}

TEST_CASE("tf-idf matches the naive formulas on small corpora") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const auto train = random_corpus(rng, 1 + rng.below(5), 1 + rng.below(10));
        const auto test = random_corpus(rng, 3, 12);
        std::vector<Document> train_docs;
        for (const auto& t : train) train_docs.push_back({t, std::nullopt});
        const auto model = fit_vectorizer(train_docs);

        auto queries = train;
        queries.insert(queries.end(), test.begin(), test.end());
        const auto expected = oracle::tfidf(train, queries);
        for (std::size_t q = 0; q < queries.size(); ++q) {
            const auto row = transform(queries[q], model);
            REQUIRE(row.nnz() == expected[q].size());
            for (const auto& e : row.entries()) {
                const auto& term = model.terms()[e.column].term;
                REQUIRE(expected[q].count(term) == 1);
                CHECK(std::abs(e.weight - expected[q].at(term)) <= 1e-12);
                CHECK(e.weight > 0.0);
            }
        }
    }
}

TEST_CASE("term frequencies of a document sum to one") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto text = random_corpus(rng, 1, 6)[0];
        const auto tokens = tokenize(text);
        std::set<std::string> distinct(tokens.begin(), tokens.end());
        double sum = 0.0;
        for (const auto& t : distinct) {
            const double tf = term_frequency(t, tokens);
            CHECK(tf >= 0.0);
            CHECK(tf <= 1.0);
            sum += tf;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("idf is monotone in N and df") {
    // Fixed df=1, growing N.
    double previous = -1.0;
    for (int n = 1; n <= 8; ++n) {
        std::vector<Document> corpus{{"t", std::nullopt}};
        for (int i = 1; i < n; ++i) corpus.push_back({"u", std::nullopt});
        const double idf = inverse_document_frequency("t", fit_vectorizer(corpus));
        CHECK(idf > previous);
        CHECK(idf >= 0.0);
        previous = idf;
    }
    // Fixed N=8, growing df.
    previous = std::numeric_limits<double>::infinity();
    for (int df = 1; df <= 8; ++df) {
        std::vector<Document> corpus;
        for (int i = 0; i < 8; ++i) corpus.push_back({i < df ? "t u" : "u", std::nullopt});
        const double idf = inverse_document_frequency("t", fit_vectorizer(corpus));
        CHECK(idf < previous);
        previous = idf;
    }
}

TEST_CASE("transform does not touch the fitted model") {
    const auto model = fit_vectorizer(docs({"a b", "b c"}));
    const auto before = to_json(model).dump();
    (void)transform(docs({"new words here", "a a a d"}), model);
    CHECK(to_json(model).dump() == before);
}

TEST_CASE("vectorizer json round trip") {
    const auto model = fit_vectorizer(docs({"The cat sat", "the dog ran", "a cat ran"}), {4});
    const auto j = to_json(model);
    CHECK(j["log_base"] == "natural");
    const auto back = vectorizer_from_json(j);
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.vocabulary_hash() == model.vocabulary_hash());
    CHECK(transform("the cat ran", back) == transform("the cat ran", model));

    auto broken = j;
    broken["terms"][0]["df"] = 99;
    CHECK_THROWS_AS(vectorizer_from_json(broken), BundleError);
}
