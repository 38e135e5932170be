#include <doctest.h>

#include <map>

#include "detect/tree.hpp"
#include "oracles.hpp"

using namespace detect;

namespace {

std::vector<Label> labels(std::initializer_list<int> v) {
    std::vector<Label> out;
    for (const int l : v) out.push_back(l ? Label::ChatGPT : Label::Human);
    return out;
}

std::vector<SampleIndex> all_rows(std::size_t n) {
    std::vector<SampleIndex> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<SampleIndex>(i);
    return out;
}

std::vector<FeatureIndex> all_features(std::size_t n) {
    std::vector<FeatureIndex> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<FeatureIndex>(i);
    return out;
}

struct Fixture {
    oracle::Dense x;
    std::vector<int> y;
};

/// Values on a quarter grid so midpoints are exact in both implementations.
Fixture random_fixture(Rng& rng, std::size_t max_samples, std::size_t n_features) {
    Fixture f;
    const auto n = 2 + rng.below(max_samples - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row;
        for (std::size_t j = 0; j < n_features; ++j) row.push_back(0.25 * static_cast<double>(rng.below(5)));
        f.x.push_back(row);
        f.y.push_back(static_cast<int>(rng.below(2)));
    }
    return f;
}

std::vector<Label> to_labels(const std::vector<int>& y) {
    std::vector<Label> out;
    for (const int v : y) out.push_back(v ? Label::ChatGPT : Label::Human);
    return out;
}

/// Drops later rows whose feature vector already appeared with another label.
Fixture conflict_free(Fixture f) {
    std::map<std::vector<double>, int> seen;
    Fixture out;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        const auto [it, fresh] = seen.emplace(f.x[i], f.y[i]);
        if (!fresh && it->second != f.y[i]) continue;
        out.x.push_back(f.x[i]);
        out.y.push_back(f.y[i]);
    }
    return out;
}

}  // namespace

TEST_CASE("gini impurity") {
    CHECK(gini_impurity(ClassCounts{2, 2}) == 0.5);
    CHECK(gini_impurity(ClassCounts{4, 0}) == 0.0);
    CHECK(gini_impurity(ClassCounts{1, 3}) == 0.375);
    CHECK_THROWS_AS(gini_impurity(ClassCounts{0, 0}), std::invalid_argument);
    const std::vector<double> weights{0.25, 0.75};
    CHECK(gini_impurity(weights) == 0.375);
}

TEST_CASE("gini stays within [0, 0.5] and is zero only when pure") {
    for (std::size_t a = 0; a < 30; ++a) {
        for (std::size_t b = 0; b < 30; ++b) {
            if (a + b == 0) continue;
            const double g = gini_impurity(ClassCounts{a, b});
            CHECK(g >= 0.0);
            CHECK(g <= 0.5);
            CHECK((g == 0.0) == (a == 0 || b == 0));
        }
    }
}

TEST_CASE("feature budget") {
    CHECK(feature_budget(MaxFeatures::All, 10) == 10);
    CHECK(feature_budget(MaxFeatures::Sqrt, 10) == 4);
    CHECK(feature_budget(MaxFeatures::Sqrt, 16) == 4);
    CHECK(feature_budget(MaxFeatures::Sqrt, 17) == 5);
    CHECK(feature_budget(MaxFeatures::Sqrt, 1) == 1);
}

TEST_CASE("best_split examples") {
    SUBCASE("unique perfect split") {
        const auto x = from_dense({{0.1}, {0.9}});
        const auto y = labels({0, 1});
        const auto s = best_split(x, y, all_rows(2), all_features(1));
        REQUIRE(s);
        CHECK(s->feature == 0);
        CHECK(s->threshold == doctest::Approx(0.5));
        CHECK(s->impurity == 0.0);
    }
    SUBCASE("constant feature gives no split") {
        const auto x = from_dense({{0.3}, {0.3}, {0.3}});
        const auto y = labels({0, 1, 0});
        CHECK_FALSE(best_split(x, y, all_rows(3), all_features(1)));
    }
    SUBCASE("tie goes to the lower feature") {
        const oracle::Dense dense{{0, 0}, {0, 0}, {1, 1}, {1, 1}};
        const auto y = labels({0, 0, 1, 1});
        const auto expected = oracle::exhaustive_best(dense, {0, 0, 1, 1}, {0, 1});
        REQUIRE(expected);
        CHECK(expected->feature == 0);
        const auto s = best_split(from_dense(dense), y, all_rows(4), all_features(2));
        REQUIRE(s);
        CHECK(s->feature == 0);
        CHECK(s->threshold == 0.5);
        // Feature 1 alone still works when it is the only candidate.
        const std::vector<FeatureIndex> only_one{1};
        CHECK(best_split(from_dense(dense), y, all_rows(4), only_one)->feature == 1);
    }
    SUBCASE("absent sparse entries act as zeros") {
        const auto x = from_dense({{-1.0}, {0.0}, {2.0}});
        const auto y = labels({0, 0, 1});
        const auto s = best_split(x, y, all_rows(3), all_features(1));
        REQUIRE(s);
        CHECK(s->threshold == 1.0);
    }
}

TEST_CASE("best_split agrees with exhaustive enumeration") {
    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const auto f = random_fixture(rng, 8, 3);
        const auto expected = oracle::exhaustive_best(f.x, f.y, {0, 1, 2});
        const auto y = to_labels(f.y);
        const auto got = best_split(from_dense(f.x), y, all_rows(f.x.size()), all_features(3));
        REQUIRE(expected.has_value() == got.has_value());
        if (!got) continue;
        CHECK(got->feature == expected->feature);
        CHECK(got->threshold == expected->threshold);
        CHECK(std::abs(got->impurity - expected->impurity) <= 1e-12);

        double c0 = 0, c1 = 0;
        for (const int v : f.y) (v ? c1 : c0) += 1;
        CHECK(got->impurity <= oracle::gini(c0, c1) + 1e-12);
    }
}

TEST_CASE("random_split examples") {
    const auto x = from_dense({{0.0}, {1.0}});
    const auto y = labels({0, 1});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto s = random_split(x, y, all_rows(2), all_features(1), rng);
        REQUIRE(s);
        CHECK(s->threshold > 0.0);
        CHECK(s->threshold < 1.0);
    }

    const auto flat = from_dense({{0.5, 0.0}, {0.5, 0.0}});
    Rng rng(1);
    CHECK_FALSE(random_split(flat, y, all_rows(2), all_features(2), rng));

    const auto wide = from_dense({{0.1, 0.7, 0.0}, {0.4, 0.2, 0.3}, {0.9, 0.5, 0.6}, {0.2, 0.0, 0.8}});
    const auto y4 = labels({0, 1, 1, 0});
    Rng a(9), b(9);
    const auto sa = random_split(wide, y4, all_rows(4), all_features(3), a);
    const auto sb = random_split(wide, y4, all_rows(4), all_features(3), b);
    REQUIRE(sa);
    CHECK(sa->feature == sb->feature);
    CHECK(sa->threshold == sb->threshold);
}

TEST_CASE("random_split picks the best of the drawn thresholds") {
    // Feature 0 separates the classes at any threshold in (0, 1); feature 1 cannot.
    const auto x = from_dense({{0.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}});
    const auto y = labels({0, 0, 1, 1});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto s = random_split(x, y, all_rows(4), all_features(2), rng);
        REQUIRE(s);
        CHECK(s->feature == 0);
        CHECK(s->impurity == 0.0);
    }
}

TEST_CASE("grow_tree examples") {
    Rng rng(42);
    SUBCASE("pure input is one leaf") {
        const auto x = from_dense({{0.1, 0.2}, {0.5, 0.0}, {0.9, 0.3}});
        const auto y = labels({1, 1, 1});
        const auto tree = grow_tree(x, y, all_rows(3), {}, rng);
        REQUIRE(tree.nodes().size() == 1);
        CHECK(tree.nodes()[0].is_leaf());
        CHECK(tree.nodes()[0].counts == ClassCounts{0, 3});
    }
    SUBCASE("xor is fitted") {
        const auto x = from_dense({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
        const auto y = labels({0, 1, 1, 0});
        const auto tree = grow_tree(x, y, all_rows(4), {}, rng);
        for (std::size_t i = 0; i < 4; ++i) CHECK(tree.vote(x.rows[i]) == y[i]);
        CHECK(tree.leaf_count() == 4);
        CHECK(tree.depth() == 2);
    }
    SUBCASE("two points need one split") {
        const auto x = from_dense({{0.2}, {0.8}});
        const auto y = labels({0, 1});
        const auto tree = grow_tree(x, y, all_rows(2), {}, rng);
        REQUIRE(tree.nodes().size() == 3);
        CHECK_FALSE(tree.nodes()[0].is_leaf());
        CHECK(tree.nodes()[1].is_leaf());
        CHECK(tree.nodes()[2].is_leaf());
    }
    SUBCASE("depth limit") {
        const auto x = from_dense({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
        const auto y = labels({0, 1, 1, 0});
        TreeParams params;
        params.max_depth = 1;
        CHECK(grow_tree(x, y, all_rows(4), params, rng).depth() == 1);
    }
    SUBCASE("empty sample list") {
        const auto x = from_dense({{0.0}});
        const auto y = labels({0});
        CHECK_THROWS_AS(grow_tree(x, y, std::vector<SampleIndex>{}, {}, rng), std::invalid_argument);
    }
}

TEST_CASE("unpruned trees fit conflict-free training data") {
    Rng gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto f = conflict_free(random_fixture(gen, 12, 3));
        const auto x = from_dense(f.x);
        const auto y = to_labels(f.y);
        for (const auto rule : {SplitRule::Best, SplitRule::Random}) {
            Rng rng(gen.next());
            const auto tree = grow_tree(x, y, all_rows(f.x.size()), {rule, MaxFeatures::All, {}, {}}, rng);
            for (std::size_t i = 0; i < f.x.size(); ++i) CHECK(tree.vote(x.rows[i]) == y[i]);
        }
    }
}

TEST_CASE("leaf counts add up and internal nodes hold none") {
    Rng gen(8);
    const auto f = random_fixture(gen, 40, 3);
    const auto x = from_dense(f.x);
    const auto y = to_labels(f.y);
    Rng rng(3);
    const auto tree = grow_tree(x, y, all_rows(f.x.size()), {SplitRule::Random, MaxFeatures::Sqrt, {}, {}}, rng);
    std::size_t total = 0;
    for (const auto& n : tree.nodes()) {
        if (n.is_leaf()) {
            total += n.counts[0] + n.counts[1];
        } else {
            CHECK(n.counts == ClassCounts{0, 0});
        }
    }
    CHECK(total == f.x.size());
}

TEST_CASE("tree json round trip preserves layout") {
    Rng gen(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_fixture(gen, 30, 3);
        const auto x = from_dense(f.x);
        const auto y = to_labels(f.y);
        Rng rng(gen.next());
        const auto tree = grow_tree(x, y, all_rows(f.x.size()), {SplitRule::Random, MaxFeatures::All, {}, {}}, rng);
        const auto back = tree_from_json(nlohmann::json::parse(to_json(tree).dump()));
        CHECK(back == tree);
    }
}
