#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "detect/corpus.hpp"
#include "detect/sparse.hpp"

namespace detect {

/// Lowercased unigram tokens in document order. Stop words are kept.
using TokenStream = std::vector<std::string>;

/// Lowercases ASCII letters and splits on every ASCII character that is not a
/// letter or digit. Bytes >= 0x80 (UTF-8 multibyte sequences) count as word
/// characters, so non-English words survive intact.
TokenStream tokenize(std::string_view text);

/// n(term, doc) / |doc|. Throws std::invalid_argument for an empty document.
double term_frequency(std::string_view term, const TokenStream& doc);

struct VectorizerConfig {
    /// Keep only the `max_vocab` terms with the highest document frequency
    /// (ties: lexicographically smaller term first). Unset means uncapped.
    std::optional<std::size_t> max_vocab;
};

struct TermStats {
    std::string term;
    std::size_t df = 0;
    double idf = 0.0;
};

/// Vocabulary plus idf(t) = ln(N / df(t)), fitted on training documents only.
/// Immutable once fitted. Column i is terms()[i]; columns follow lexicographic
/// term order.
class VectorizerModel {
public:
    VectorizerModel() = default;
    VectorizerModel(std::size_t n_documents, std::vector<TermStats> terms, VectorizerConfig config);

    std::size_t n_documents() const noexcept { return n_documents_; }
    std::size_t vocabulary_size() const noexcept { return terms_.size(); }
    const std::vector<TermStats>& terms() const noexcept { return terms_; }
    const VectorizerConfig& config() const noexcept { return config_; }

    std::optional<FeatureIndex> index_of(std::string_view term) const;

    /// Hash over (term, df) pairs; bundles use it as an integrity check.
    std::uint64_t vocabulary_hash() const noexcept;

private:
    std::size_t n_documents_ = 0;
    std::vector<TermStats> terms_;
    std::unordered_map<std::string, FeatureIndex> index_;
    VectorizerConfig config_;
};

/// ln(N / df(term)). Throws std::out_of_range for a term outside the vocabulary.
double inverse_document_frequency(std::string_view term, const VectorizerModel& model);

/// Throws InputError for an empty corpus or a cap below 1.
VectorizerModel fit_vectorizer(std::span<const Document> train, const VectorizerConfig& config = {});
VectorizerModel fit_vectorizer(const LabeledCorpus& train, const VectorizerConfig& config = {});

/// TF-IDF row for one text. Out-of-vocabulary tokens still count in the TF
/// denominator but produce no entry. Zero weights (idf 0) are dropped.
SparseVector transform(std::string_view text, const VectorizerModel& model);

SparseMatrix transform(std::span<const Document> docs, const VectorizerModel& model);
SparseMatrix transform(const LabeledCorpus& corpus, const VectorizerModel& model);

/// True when no token of `text` is in the vocabulary (including no tokens at all).
bool all_out_of_vocabulary(std::string_view text, const VectorizerModel& model);

nlohmann::json to_json(const VectorizerModel& model);
/// Validates index density, df range and idf consistency; throws BundleError.
VectorizerModel vectorizer_from_json(const nlohmann::json& j);

}  // namespace detect
