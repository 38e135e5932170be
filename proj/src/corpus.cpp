#include "detect/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "detect/csv.hpp"
#include "detect/error.hpp"
#include "detect/rng.hpp"

namespace detect {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::size_t column_index(const csv::Record& header, const std::string& name,
                         const std::filesystem::path& path) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return i;
    }
    throw InputError("column '" + name + "' not found in " + path.string());
}

std::vector<std::size_t> indices_of(const LabeledCorpus& corpus, Label label) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus.labels[i] == label) out.push_back(i);
    }
    return out;
}

LabeledCorpus select(const LabeledCorpus& corpus, const std::vector<std::size_t>& rows) {
    LabeledCorpus out;
    out.documents.reserve(rows.size());
    out.labels.reserve(rows.size());
    for (const auto i : rows) out.push_back(corpus.documents[i], corpus.labels[i]);
    return out;
}

}  // namespace

std::string_view to_string(Label label) noexcept {
    return label == Label::Human ? "human" : "chatgpt";
}

ClassCounts LabeledCorpus::class_counts() const noexcept {
    ClassCounts counts{};
    for (const auto label : labels) ++counts[index_of(label)];
    return counts;
}

void LabeledCorpus::push_back(Document doc, Label label) {
    documents.push_back(std::move(doc));
    labels.push_back(label);
}

LabelMapping default_label_mapping() {
    return {{"human", Label::Human}, {"0", Label::Human}, {"chatgpt", Label::ChatGPT}, {"1", Label::ChatGPT}};
}

LabeledCorpus load_csv(const std::filesystem::path& path, const CsvColumns& columns,
                       const LabelMapping& mapping) {
    if (!std::filesystem::exists(path)) throw InputError("file not found: " + path.string());
    const auto records = csv::read_file(path);
    if (records.empty()) throw InputError("missing header row in " + path.string());

    const auto& header = records.front();
    const auto text_col = column_index(header, columns.text, path);
    const auto label_col = column_index(header, columns.label, path);
    std::optional<std::size_t> id_col;
    if (columns.source_id) id_col = column_index(header, *columns.source_id, path);

    LabeledCorpus corpus;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& record = records[r];
        if (record.size() == 1 && trim(record[0]).empty()) continue;  // blank line
        const auto row = std::to_string(r);
        const auto needed = std::max({text_col, label_col, id_col.value_or(0)});
        if (record.size() <= needed) {
            throw InputError("row " + row + ": expected at least " + std::to_string(needed + 1) + " fields, got " +
                             std::to_string(record.size()));
        }
        const auto raw_label = trim(record[label_col]);
        const auto found = mapping.find(raw_label);
        if (found == mapping.end()) {
            throw InputError("row " + row + ": label value '" + std::string(raw_label) + "' is not mapped");
        }
        if (trim(record[text_col]).empty()) throw InputError("row " + row + ": empty text");

        Document doc{record[text_col], std::nullopt};
        if (id_col) doc.source_id = record[*id_col];
        corpus.push_back(std::move(doc), found->second);
    }
    return corpus;
}

void write_csv(const std::filesystem::path& path, const LabeledCorpus& corpus) {
    const bool with_ids = std::any_of(corpus.documents.begin(), corpus.documents.end(),
                                      [](const Document& d) { return d.source_id.has_value(); });
    std::vector<csv::Record> records;
    records.reserve(corpus.size() + 1);
    if (with_ids) {
        records.push_back({"id", "text", "label"});
    } else {
        records.push_back({"text", "label"});
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& doc = corpus.documents[i];
        const std::string label(to_string(corpus.labels[i]));
        if (with_ids) {
            records.push_back({doc.source_id.value_or(""), doc.text, label});
        } else {
            records.push_back({doc.text, label});
        }
    }
    csv::write_file(path, records);
}

LabeledCorpus undersample_balance(const LabeledCorpus& corpus, std::uint64_t seed) {
    const auto counts = corpus.class_counts();
    if (counts[0] == 0 || counts[1] == 0) {
        throw InputError("undersampling needs both classes present");
    }
    const auto target = std::min(counts[0], counts[1]);
    const Label majority = counts[0] > counts[1] ? Label::Human : Label::ChatGPT;

    std::vector<bool> keep(corpus.size(), true);
    if (counts[0] != counts[1]) {
        auto majority_rows = indices_of(corpus, majority);
        Rng rng(seed);
        rng.select_prefix(std::span(majority_rows), target);
        for (std::size_t i = target; i < majority_rows.size(); ++i) keep[majority_rows[i]] = false;
    }

    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (keep[i]) survivors.push_back(i);
    }
    return select(corpus, survivors);
}

SplitCorpus stratified_split(const LabeledCorpus& corpus, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw InputError("split ratio must lie strictly between 0 and 1");
    }
    const auto counts = corpus.class_counts();
    const auto n = corpus.size();
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (counts[0] == 0 || counts[1] == 0) throw InputError("split needs both classes present");
    if (n_train == 0 || n_train == n) {
        throw InputError("corpus of " + std::to_string(n) + " documents is too small to split at ratio " +
                         std::to_string(ratio));
    }

    ClassCounts quota{};
    std::array<double, kNumClasses> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double exact = ratio * static_cast<double>(counts[c]);
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    while (assigned < n_train) {
        // Largest remainder first; Human wins ties. Never fill a class completely
        // while the other still has room.
        std::size_t pick = remainder[0] >= remainder[1] ? 0 : 1;
        if (quota[pick] + 1 >= counts[pick] && quota[1 - pick] + 1 < counts[1 - pick]) pick = 1 - pick;
        ++quota[pick];
        remainder[pick] = -1.0;
        ++assigned;
    }

    Rng rng(seed);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto rows = indices_of(corpus, static_cast<Label>(c));
        rng.shuffle(std::span(rows));
        train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]));
        test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]), rows.end());
    }
    // Keep corpus order within each half.
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return SplitCorpus{select(corpus, train_rows), select(corpus, test_rows), seed, ratio};
}

LabeledCorpus synthesize_corpus(std::size_t n_per_class, std::uint64_t seed) {
    if (n_per_class < 1) throw InputError("n_per_class must be at least 1");

    static constexpr std::array<std::string_view, 24> kFiller = {
        "the", "a",    "and",  "of",   "to",  "in",   "is",    "it",    "that", "for",  "on",   "with",
        "as",  "this", "was",  "be",   "are", "by",   "people", "time", "news", "said", "would", "about"};
    static constexpr std::array<std::string_view, 12> kHumanMarkers = {
        "honestly", "gonna", "lol", "yeah", "kinda", "btw", "tbh", "anyway", "stuff", "dunno", "guess", "nope"};
    static constexpr std::array<std::string_view, 12> kChatGptMarkers = {
        "additionally", "furthermore", "overall", "crucial", "delve",     "comprehensive",
        "ensure",       "moreover",    "notably", "various", "essential", "landscape"};

    Rng rng(seed);
    LabeledCorpus corpus;
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const Label label = (i % 2 == 0) ? Label::Human : Label::ChatGPT;
        const auto& markers = label == Label::Human ? kHumanMarkers : kChatGptMarkers;
        const auto length = 12 + rng.below(19);
        std::string text;
        std::size_t marker_count = 0;
        for (std::uint64_t t = 0; t < length; ++t) {
            std::string_view word;
            if (rng.uniform() < 0.25 || (t + 1 == length && marker_count == 0)) {
                word = markers[rng.below(markers.size())];
                ++marker_count;
            } else {
                word = kFiller[rng.below(kFiller.size())];
            }
            if (!text.empty()) text.push_back(' ');
            text.append(word);
        }
        text.push_back('.');
        corpus.push_back(Document{std::move(text), "syn-" + std::to_string(i)}, label);
    }
    return corpus;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) noexcept {
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fingerprint(const LabeledCorpus& corpus) {
    std::vector<std::uint64_t> rows;
    rows.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto h = fnv1a(corpus.documents[i].text);
        h = fnv1a(to_string(corpus.labels[i]), h);
        rows.push_back(h);
    }
    std::sort(rows.begin(), rows.end());
    std::uint64_t h = mix64(rows.size());
    for (const auto r : rows) h = mix64(h ^ r);
    return h;
}

nlohmann::json counts_json(const ClassCounts& counts) {
    return {{"human", counts[0]}, {"chatgpt", counts[1]}};
}

nlohmann::json corpus_summary(const LabeledCorpus& corpus, bool balance_applied, std::uint64_t seed) {
    return {{"n_total", corpus.size()},
            {"n_per_class", counts_json(corpus.class_counts())},
            {"balance_applied", balance_applied},
            {"seed", seed}};
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace detect
