#include "detect/vectorizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "detect/error.hpp"

namespace detect {

namespace {

bool is_word_byte(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

char lower(unsigned char c) noexcept {
    return static_cast<char>((c >= 'A' && c <= 'Z') ? c + ('a' - 'A') : c);
}

}  // namespace

TokenStream tokenize(std::string_view text) {
    TokenStream tokens;
    std::string current;
    for (const unsigned char c : text) {
        if (is_word_byte(c)) {
            current.push_back(lower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double term_frequency(std::string_view term, const TokenStream& doc) {
    if (doc.empty()) throw std::invalid_argument("term frequency of an empty document");
    const auto n = std::count(doc.begin(), doc.end(), term);
    return static_cast<double>(n) / static_cast<double>(doc.size());
}

VectorizerModel::VectorizerModel(std::size_t n_documents, std::vector<TermStats> terms, VectorizerConfig config)
    : n_documents_(n_documents), terms_(std::move(terms)), config_(config) {
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        index_.emplace(terms_[i].term, static_cast<FeatureIndex>(i));
    }
}

std::optional<FeatureIndex> VectorizerModel::index_of(std::string_view term) const {
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t VectorizerModel::vocabulary_hash() const noexcept {
    std::uint64_t h = fnv1a(std::to_string(n_documents_));
    for (const auto& t : terms_) {
        h = fnv1a(t.term, h);
        h = fnv1a("\x1f" + std::to_string(t.df) + "\x1e", h);
    }
    return h;
}

double inverse_document_frequency(std::string_view term, const VectorizerModel& model) {
    const auto index = model.index_of(term);
    if (!index) throw std::out_of_range("term not in vocabulary: " + std::string(term));
    return model.terms()[*index].idf;
}

VectorizerModel fit_vectorizer(std::span<const Document> train, const VectorizerConfig& config) {
    if (train.empty()) throw InputError("cannot fit a vectorizer on an empty corpus");
    if (config.max_vocab && *config.max_vocab < 1) throw InputError("vocabulary cap must be at least 1");

    std::unordered_map<std::string, std::size_t> df;
    for (const auto& doc : train) {
        auto tokens = tokenize(doc.text);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t : tokens) ++df[std::move(t)];
    }

    std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
    if (config.max_vocab && *config.max_vocab < ranked.size()) {
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        ranked.resize(*config.max_vocab);
    }
    std::sort(ranked.begin(), ranked.end());

    const auto n = static_cast<double>(train.size());
    std::vector<TermStats> terms;
    terms.reserve(ranked.size());
    for (auto& [term, count] : ranked) {
        terms.push_back({std::move(term), count, std::log(n / static_cast<double>(count))});
    }
    return VectorizerModel(train.size(), std::move(terms), config);
}

VectorizerModel fit_vectorizer(const LabeledCorpus& train, const VectorizerConfig& config) {
    return fit_vectorizer(std::span<const Document>(train.documents), config);
}

SparseVector transform(std::string_view text, const VectorizerModel& model) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) return {};

    std::map<FeatureIndex, std::size_t> counts;
    for (const auto& token : tokens) {
        if (const auto index = model.index_of(token)) ++counts[*index];
    }
    const auto length = static_cast<double>(tokens.size());
    std::vector<SparseEntry> entries;
    entries.reserve(counts.size());
    for (const auto& [column, count] : counts) {
        const double tf = static_cast<double>(count) / length;
        const double weight = tf * model.terms()[column].idf;
        if (weight > 0.0) entries.push_back({column, weight});
    }
    return SparseVector(std::move(entries));
}

SparseMatrix transform(std::span<const Document> docs, const VectorizerModel& model) {
    SparseMatrix m;
    m.n_cols = model.vocabulary_size();
    m.rows.reserve(docs.size());
    for (const auto& doc : docs) m.rows.push_back(transform(doc.text, model));
    return m;
}

SparseMatrix transform(const LabeledCorpus& corpus, const VectorizerModel& model) {
    return transform(std::span<const Document>(corpus.documents), model);
}

bool all_out_of_vocabulary(std::string_view text, const VectorizerModel& model) {
    const auto tokens = tokenize(text);
    return std::none_of(tokens.begin(), tokens.end(), [&](const auto& t) { return model.index_of(t).has_value(); });
}

nlohmann::json to_json(const VectorizerModel& model) {
    nlohmann::json terms = nlohmann::json::array();
    for (std::size_t i = 0; i < model.terms().size(); ++i) {
        const auto& t = model.terms()[i];
        terms.push_back({{"term", t.term}, {"index", i}, {"df", t.df}, {"idf", t.idf}});
    }
    nlohmann::json config = {{"lowercase", true},
                             {"tokenizer", "split-non-alphanumeric"},
                             {"ngram", 1},
                             {"stop_words", "retained"},
                             {"max_vocab", nullptr}};
    if (model.config().max_vocab) config["max_vocab"] = *model.config().max_vocab;
    return {{"n_documents", model.n_documents()}, {"log_base", "natural"}, {"terms", terms}, {"config", config}};
}

VectorizerModel vectorizer_from_json(const nlohmann::json& j) {
    try {
        if (j.at("log_base") != "natural") throw BundleError("unsupported log base");
        const auto n = j.at("n_documents").get<std::size_t>();
        const auto& items = j.at("terms");
        std::vector<TermStats> terms(items.size());
        std::vector<bool> seen(items.size(), false);
        for (const auto& item : items) {
            const auto index = item.at("index").get<std::size_t>();
            if (index >= terms.size() || seen[index]) throw BundleError("vocabulary indices are not dense and unique");
            seen[index] = true;
            TermStats t{item.at("term").get<std::string>(), item.at("df").get<std::size_t>(),
                        item.at("idf").get<double>()};
            if (t.df < 1 || t.df > n) throw BundleError("document frequency out of range for term '" + t.term + "'");
            if (t.idf != std::log(static_cast<double>(n) / static_cast<double>(t.df))) {
                throw BundleError("idf inconsistent with df for term '" + t.term + "'");
            }
            terms[index] = std::move(t);
        }
        VectorizerConfig config;
        const auto& cfg = j.at("config");
        if (cfg.contains("max_vocab") && !cfg["max_vocab"].is_null()) {
            config.max_vocab = cfg["max_vocab"].get<std::size_t>();
        }
        return VectorizerModel(n, std::move(terms), config);
    } catch (const nlohmann::json::exception& e) {
        throw BundleError(std::string("malformed vectorizer: ") + e.what());
    }
}

}  // namespace detect
