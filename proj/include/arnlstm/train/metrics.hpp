#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "arnlstm/numerics/ops.hpp"

namespace arnlstm {

/// An unset optional marks an undefined metric (zero denominator).
using MetricValue = std::optional<double>;

struct Metrics {
    MetricValue accuracy;
    MetricValue precision;
    MetricValue recall;
    MetricValue f_score;
};

/// Accuracy = (TP+TN)/all, precision = TP/(TP+FP), recall = TP/(TP+FN),
/// F = 2PR/(P+R). Each is undefined when its denominator is zero.
inline Metrics metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
    Metrics m;
    const std::size_t total = tp + tn + fp + fn;
    if (total > 0) m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0) {
        m.f_score = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

    void add(std::size_t truth, std::size_t predicted) {
        if (truth >= classes_ || predicted >= classes_) {
            throw DataError("confusion entry (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                            ") outside " + std::to_string(classes_) + " classes");
        }
        ++counts_[truth * classes_ + predicted];
    }

    std::size_t classes() const { return classes_; }
    std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * classes_ + predicted); }

    std::size_t total() const {
        std::size_t n = 0;
        for (auto c : counts_) n += c;
        return n;
    }
    std::size_t trace() const {
        std::size_t n = 0;
        for (std::size_t c = 0; c < classes_; ++c) n += at(c, c);
        return n;
    }
    std::size_t row_total(std::size_t truth) const {
        std::size_t n = 0;
        for (std::size_t p = 0; p < classes_; ++p) n += at(truth, p);
        return n;
    }
    std::size_t column_total(std::size_t predicted) const {
        std::size_t n = 0;
        for (std::size_t t = 0; t < classes_; ++t) n += at(t, predicted);
        return n;
    }

    // One-vs-rest counts for class c.
    std::size_t tp(std::size_t c) const { return at(c, c); }
    std::size_t fn(std::size_t c) const { return row_total(c) - at(c, c); }
    std::size_t fp(std::size_t c) const { return column_total(c) - at(c, c); }
    std::size_t tn(std::size_t c) const { return total() - tp(c) - fn(c) - fp(c); }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t classes_ = 0;
    std::vector<std::size_t> counts_;
};

struct ClassReport {
    /// One-vs-rest metrics from the confusion matrix.
    Metrics metrics;
    /// Fraction of this class's samples predicted correctly; undefined for an empty row.
    MetricValue class_accuracy;
    /// Argmax off-diagonal column of this class's row; unset when the row has no errors.
    std::optional<std::size_t> most_confused_with;
    /// Several columns shared the maximum; the lowest index was reported.
    bool confusion_tie = false;
};

struct EvalReport {
    ConfusionMatrix confusion;
    std::vector<ClassReport> per_class;
    double accuracy = 0.0;
    double mean_loss = 0.0;
    std::size_t samples = 0;
};

inline EvalReport report_from_confusion(const ConfusionMatrix& cm, double mean_loss) {
    EvalReport r;
    r.confusion = cm;
    r.samples = cm.total();
    r.accuracy = r.samples ? static_cast<double>(cm.trace()) / static_cast<double>(r.samples) : 0.0;
    r.mean_loss = mean_loss;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        ClassReport cr;
        cr.metrics = metrics_from_counts(cm.tp(c), cm.tn(c), cm.fp(c), cm.fn(c));
        if (cm.row_total(c) > 0) {
            cr.class_accuracy = static_cast<double>(cm.at(c, c)) / static_cast<double>(cm.row_total(c));
        }
        std::size_t best = 0;
        for (std::size_t p = 0; p < cm.classes(); ++p) {
            if (p == c || cm.at(c, p) == 0) continue;
            if (cm.at(c, p) > best) {
                best = cm.at(c, p);
                cr.most_confused_with = p;
                cr.confusion_tie = false;
            } else if (cm.at(c, p) == best) {
                cr.confusion_tie = true;
            }
        }
        r.per_class.push_back(cr);
    }
    return r;
}

/// Row argmax; ties go to the lowest class index.
inline std::size_t argmax_row(const Tensor& probs, std::size_t row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.cols(); ++c)
        if (probs.at(row, c) > probs.at(row, best)) best = c;
    return best;
}

/// Confusion matrix, metrics and mean cross-entropy from N×C probabilities.
inline EvalReport evaluate_probabilities(const Tensor& probs, std::span<const std::size_t> labels) {
    if (probs.rank() != 2 || probs.rows() != labels.size()) {
        throw ShapeError("evaluate: " + std::to_string(labels.size()) + " labels for probabilities " +
                         shape_string(probs.shape()));
    }
    ConfusionMatrix cm(probs.cols());
    double loss = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        cm.add(labels[i], argmax_row(probs, i));
        loss -= std::log(std::max(probs.at(i, labels[i]), op::kProbabilityFloor));
    }
    return report_from_confusion(cm, labels.empty() ? 0.0 : loss / static_cast<double>(labels.size()));
}

/// Pool several reports over the same classes: confusion counts add and the
/// loss is averaged per sample.
inline EvalReport combine_reports(std::span<const EvalReport> reports) {
    if (reports.empty()) throw DataError("combine_reports: no reports");
    ConfusionMatrix cm(reports[0].confusion.classes());
    double loss = 0.0;
    for (const auto& r : reports) {
        if (r.confusion.classes() != cm.classes()) throw ShapeError("combine_reports: class counts differ");
        for (std::size_t t = 0; t < cm.classes(); ++t)
            for (std::size_t p = 0; p < cm.classes(); ++p)
                for (std::size_t k = 0; k < r.confusion.at(t, p); ++k) cm.add(t, p);
        loss += r.mean_loss * static_cast<double>(r.samples);
    }
    return report_from_confusion(cm, cm.total() ? loss / static_cast<double>(cm.total()) : 0.0);
}

} // namespace arnlstm
