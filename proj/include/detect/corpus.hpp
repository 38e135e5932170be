#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace detect {

/// Binary provenance label. ChatGPT is the positive class everywhere.
enum class Label : std::uint8_t { Human = 0, ChatGPT = 1 };

inline constexpr std::size_t kNumClasses = 2;

constexpr std::size_t index_of(Label label) noexcept { return static_cast<std::size_t>(label); }
std::string_view to_string(Label label) noexcept;

struct Document {
    std::string text;
    std::optional<std::string> source_id;
};

using ClassCounts = std::array<std::size_t, kNumClasses>;

/// Documents with parallel labels. Order is meaningful and preserved by
/// every operation that does not explicitly reorder.
struct LabeledCorpus {
    std::vector<Document> documents;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return documents.size(); }
    bool empty() const noexcept { return documents.empty(); }
    ClassCounts class_counts() const noexcept;
    void push_back(Document doc, Label label);
};

struct SplitCorpus {
    LabeledCorpus train;
    LabeledCorpus test;
    std::uint64_t seed = 0;
    double ratio = 0.8;
};

/// Raw label value (as it appears in the file) to class.
using LabelMapping = std::map<std::string, Label, std::less<>>;

/// "human"/"0" to Human, "chatgpt"/"1" to ChatGPT.
LabelMapping default_label_mapping();

struct CsvColumns {
    std::string text = "text";
    std::string label = "label";
    std::optional<std::string> source_id;
};

/// Loads a headered CSV. Label values are matched after trimming surrounding
/// whitespace. Row numbers in errors are 1-based data rows (header excluded).
LabeledCorpus load_csv(const std::filesystem::path& path, const CsvColumns& columns,
                       const LabelMapping& mapping);

/// Writes `text,label` (or `id,text,label` when any document has a source id)
/// with labels spelled "human"/"chatgpt".
void write_csv(const std::filesystem::path& path, const LabeledCorpus& corpus);

/// Drops majority-class documents, chosen uniformly at random, until both
/// classes have min(class counts) documents. Survivors keep their order.
LabeledCorpus undersample_balance(const LabeledCorpus& corpus, std::uint64_t seed);

/// Per-class shuffle, then a per-class prefix goes to train. Class quotas are
/// floor(ratio * n_c); remaining slots up to floor(ratio * N) go to the classes
/// with the largest fractional part (Human first on ties).
SplitCorpus stratified_split(const LabeledCorpus& corpus, double ratio, std::uint64_t seed);

/// Separable two-class fixture: each document mixes shared filler words with
/// a class-specific marker vocabulary.
LabeledCorpus synthesize_corpus(std::size_t n_per_class, std::uint64_t seed);

/// Order-independent 64-bit hash over (text, label) pairs.
std::uint64_t fingerprint(const LabeledCorpus& corpus);

/// {n_total, n_per_class: {human, chatgpt}, balance_applied, seed}
nlohmann::json corpus_summary(const LabeledCorpus& corpus, bool balance_applied, std::uint64_t seed);

nlohmann::json counts_json(const ClassCounts& counts);

/// FNV-1a over bytes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

std::string hex64(std::uint64_t value);

}  // namespace detect
