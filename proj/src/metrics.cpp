#include "detect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "detect/error.hpp"

namespace detect {

namespace {

double ratio(double num, double den, const char* name, std::vector<std::string>& degenerate) {
    if (den == 0.0) {
        degenerate.emplace_back(name);
        return 0.0;
    }
    return num / den;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("truth and predictions differ in length");
    if (truth.empty()) throw std::invalid_argument("confusion matrix of zero samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool actual = truth[i] == Label::ChatGPT;
        const bool guess = predicted[i] == Label::ChatGPT;
        if (actual && guess) {
            ++cm.tp;
        } else if (actual) {
            ++cm.fn;
        } else if (guess) {
            ++cm.fp;
        } else {
            ++cm.tn;
        }
    }
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("metrics of zero samples");
    MetricsReport r;
    r.confusion = cm;
    const auto tp = static_cast<double>(cm.tp);
    const auto tn = static_cast<double>(cm.tn);
    const auto fp = static_cast<double>(cm.fp);
    const auto fn = static_cast<double>(cm.fn);

    r.accuracy = (tp + tn) / (tp + tn + fp + fn);
    r.precision = ratio(tp, tp + fp, "precision", r.degenerate);
    r.recall = ratio(tp, tp + fn, "recall", r.degenerate);
    r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall, "f1", r.degenerate);
    const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    r.mcc = ratio(tp * tn - fp * fn, den, "mcc", r.degenerate);
    return r;
}

std::vector<RocPoint> roc_curve(std::span<const Label> truth, std::span<const double> scores) {
    if (truth.size() != scores.size()) throw std::invalid_argument("truth and scores differ in length");
    std::size_t positives = 0;
    for (const auto label : truth) positives += label == Label::ChatGPT ? 1 : 0;
    const std::size_t negatives = truth.size() - positives;
    if (positives == 0 || negatives == 0) throw std::invalid_argument("ROC needs both classes in the truth labels");
    if (!std::all_of(scores.begin(), scores.end(), [](double s) { return std::isfinite(s); })) {
        throw std::invalid_argument("ROC scores must be finite");
    }

    std::vector<std::size_t> order(truth.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> roc{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == threshold; ++i) {
            if (truth[order[i]] == Label::ChatGPT) {
                ++tp;
            } else {
                ++fp;
            }
        }
        roc.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                       static_cast<double>(tp) / static_cast<double>(positives), threshold});
    }
    return roc;
}

double auc(std::span<const RocPoint> roc) {
    double area = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i) {
        area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
    }
    return area;
}

MetricsReport evaluate(std::span<const Label> truth, std::span<const Label> predicted,
                       std::span<const double> scores) {
    auto report = compute_metrics(confusion(truth, predicted));
    const bool both = std::find(truth.begin(), truth.end(), Label::Human) != truth.end() &&
                      std::find(truth.begin(), truth.end(), Label::ChatGPT) != truth.end();
    if (both) {
        report.roc = roc_curve(truth, scores);
        report.auc = auc(report.roc);
    } else {
        report.degenerate.emplace_back("auc");
    }
    return report;
}

nlohmann::json to_json(const MetricsReport& report, bool include_roc) {
    const auto& cm = report.confusion;
    nlohmann::json j = {{"confusion", {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}}},
                        {"accuracy", report.accuracy},
                        {"precision", report.precision},
                        {"recall", report.recall},
                        {"f1", report.f1},
                        {"mcc", report.mcc},
                        {"auc", report.auc ? nlohmann::json(*report.auc) : nlohmann::json(nullptr)},
                        {"degenerate", report.degenerate}};
    if (include_roc) {
        nlohmann::json roc = nlohmann::json::array();
        for (const auto& p : report.roc) {
            roc.push_back({{"fpr", p.fpr},
                           {"tpr", p.tpr},
                           {"threshold", std::isfinite(p.threshold) ? nlohmann::json(p.threshold) : nlohmann::json(nullptr)}});
        }
        j["roc"] = std::move(roc);
    }
    return j;
}

void write_roc_csv(const std::filesystem::path& path, std::span<const RocPoint> roc) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << "fpr,tpr,threshold\n";
    for (const auto& p : roc) {
        out << format_double(p.fpr) << ',' << format_double(p.tpr) << ',' << format_double(p.threshold) << '\n';
    }
}

}  // namespace detect
