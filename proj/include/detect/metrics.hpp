#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "detect/corpus.hpp"

namespace detect {

/// Positive class is ChatGPT.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws std::invalid_argument on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted);

/// Positive iff score >= threshold. The first point uses threshold +inf.
struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct MetricsReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
    /// Metrics whose denominator was zero; each is reported as 0.
    std::vector<std::string> degenerate;
    std::vector<RocPoint> roc;
    std::optional<double> auc;
};

/// Accuracy, precision, recall, F1 and MCC from confusion counts. F1 is the
/// harmonic mean of the returned precision and recall.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// One point per distinct score (descending), after a (0,0) start.
/// Throws std::invalid_argument unless both classes are present and every
/// score is finite.
std::vector<RocPoint> roc_curve(std::span<const Label> truth, std::span<const double> scores);

/// Trapezoidal area under the curve over fpr.
double auc(std::span<const RocPoint> roc);

/// Full report: confusion metrics for `predicted`, plus ROC and AUC from
/// `scores` when the truth has both classes.
MetricsReport evaluate(std::span<const Label> truth, std::span<const Label> predicted,
                       std::span<const double> scores);

nlohmann::json to_json(const MetricsReport& report, bool include_roc = true);

/// CSV with header "fpr,tpr,threshold"; the sentinel threshold is written "inf".
void write_roc_csv(const std::filesystem::path& path, std::span<const RocPoint> roc);

}  // namespace detect
