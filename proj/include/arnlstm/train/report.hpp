#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "arnlstm/train/trainer.hpp"

// Report writers. Column orders are fixed:
//   fold table  fold,acc_percent,loss
//   per-class   class,acc_percent,similar_class
//   history     epoch,train_loss,val_loss,val_acc_percent,improved
namespace arnlstm::report {

inline constexpr const char* kUndefined = "undefined";

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string class_name(const std::vector<std::string>& names, std::size_t c) {
    return c < names.size() ? names[c] : std::to_string(c);
}

/// Fold numbers start at 1; loss is the validation cross-entropy at the selected epoch.
inline std::string fold_table_csv(const CrossValidationResult& cv) {
    std::string out = "fold,acc_percent,loss\n";
    for (const auto& f : cv.folds) {
        out += std::to_string(f.fold + 1) + "," + fixed(100.0 * f.test.accuracy, 2) + "," +
               fixed(f.training.best_val_loss, 4) + "\n";
    }
    return out;
}

/// One row per class; similar_class is empty when the class has no errors.
inline std::string per_class_csv(const EvalReport& r, const std::vector<std::string>& names = {}) {
    std::string out = "class,acc_percent,similar_class\n";
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& cr = r.per_class[c];
        out += class_name(names, c) + ",";
        out += cr.class_accuracy ? fixed(100.0 * *cr.class_accuracy, 2) : kUndefined;
        out += ",";
        if (cr.most_confused_with) out += class_name(names, *cr.most_confused_with);
        out += "\n";
    }
    return out;
}

inline std::string history_csv(const TrainResult& t) {
    std::string out = "epoch,train_loss,val_loss,val_acc_percent,improved\n";
    for (const auto& e : t.history) {
        out += std::to_string(e.epoch) + "," + fixed(e.train_loss, 6) + "," + fixed(e.val_loss, 6) + "," +
               fixed(100.0 * e.val_accuracy, 2) + "," + (e.improved ? "1" : "0") + "\n";
    }
    return out;
}

inline nlohmann::ordered_json metric_json(const MetricValue& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(kUndefined);
}

inline nlohmann::ordered_json eval_json(const EvalReport& r, const std::vector<std::string>& names = {}) {
    using nlohmann::ordered_json;
    ordered_json j;
    const std::size_t C = r.confusion.classes();
    j["classes"] = C;
    j["samples"] = r.samples;
    j["accuracy"] = r.accuracy;
    j["mean_loss"] = r.mean_loss;
    ordered_json cm = ordered_json::array();
    for (std::size_t t = 0; t < C; ++t) {
        ordered_json row = ordered_json::array();
        for (std::size_t p = 0; p < C; ++p) row.push_back(r.confusion.at(t, p));
        cm.push_back(row);
    }
    j["confusion_matrix"] = cm;
    ordered_json pc = ordered_json::array();
    for (std::size_t c = 0; c < C; ++c) {
        const auto& cr = r.per_class[c];
        ordered_json e;
        e["class"] = class_name(names, c);
        e["class_accuracy"] = metric_json(cr.class_accuracy);
        e["accuracy"] = metric_json(cr.metrics.accuracy);
        e["precision"] = metric_json(cr.metrics.precision);
        e["recall"] = metric_json(cr.metrics.recall);
        e["f_score"] = metric_json(cr.metrics.f_score);
        e["most_confused_with"] = cr.most_confused_with ? ordered_json(class_name(names, *cr.most_confused_with))
                                                        : ordered_json(nullptr);
        e["confusion_tie"] = cr.confusion_tie;
        pc.push_back(e);
    }
    j["per_class"] = pc;
    return j;
}

inline nlohmann::ordered_json cv_json(const CrossValidationResult& cv, const std::vector<std::string>& names = {}) {
    nlohmann::ordered_json j;
    j["folds"] = cv.folds.size();
    j["mean_accuracy"] = cv.mean_accuracy;
    j["std_accuracy"] = cv.std_accuracy;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : cv.folds) {
        nlohmann::ordered_json e;
        e["fold"] = f.fold + 1;
        e["best_epoch"] = f.training.best_epoch;
        e["epochs_run"] = f.training.history.size();
        e["validation_accuracy"] = f.training.best_val_accuracy;
        e["validation_loss"] = f.training.best_val_loss;
        e["test"] = eval_json(f.test, names);
        arr.push_back(e);
    }
    j["per_fold"] = arr;
    return j;
}

/// Heatmap with one <rect class="cell"> per matrix entry, shaded by row-normalized count.
inline std::string confusion_svg(const EvalReport& r, const std::vector<std::string>& names = {}) {
    const std::size_t C = r.confusion.classes();
    const int cell = 40, margin = 110;
    const int size = margin + static_cast<int>(C) * cell + 10;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) + "\" height=\"" +
                    std::to_string(size) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<text x=\"" + std::to_string(margin) + "\" y=\"14\">predicted</text>\n";
    s += "<text x=\"4\" y=\"" + std::to_string(margin - 4) + "\">true</text>\n";
    for (std::size_t t = 0; t < C; ++t) {
        const int y = margin + static_cast<int>(t) * cell;
        s += "<text x=\"4\" y=\"" + std::to_string(y + cell / 2 + 4) + "\">" + class_name(names, t) + "</text>\n";
        s += "<text x=\"" + std::to_string(y + 4) + "\" y=\"" + std::to_string(margin - 8) + "\" transform=\"rotate(-45 " +
             std::to_string(y + 4) + " " + std::to_string(margin - 8) + ")\">" + class_name(names, t) + "</text>\n";
    }
    for (std::size_t t = 0; t < C; ++t) {
        const std::size_t row = r.confusion.row_total(t);
        for (std::size_t p = 0; p < C; ++p) {
            const std::size_t n = r.confusion.at(t, p);
            const double frac = row ? static_cast<double>(n) / static_cast<double>(row) : 0.0;
            const int shade = 255 - static_cast<int>(frac * 200.0 + 0.5);
            const int x = margin + static_cast<int>(p) * cell, y = margin + static_cast<int>(t) * cell;
            s += "<rect class=\"cell\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
                 std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"rgb(" + std::to_string(shade) +
                 "," + std::to_string(shade) + ",255)\" stroke=\"#888\"/>\n";
            s += "<text x=\"" + std::to_string(x + cell / 2) + "\" y=\"" + std::to_string(y + cell / 2 + 4) +
                 "\" text-anchor=\"middle\">" + std::to_string(n) + "</text>\n";
        }
    }
    return s + "</svg>\n";
}

/// Horizontal bars of per-class accuracy; undefined classes get an empty bar.
inline std::string accuracy_bar_svg(const EvalReport& r, const std::vector<std::string>& names = {}) {
    const std::size_t C = r.per_class.size();
    const int bar = 22, label = 110, width = 300;
    const int height = static_cast<int>(C) * bar + 30;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(label + width + 70) +
                    "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t c = 0; c < C; ++c) {
        const auto& acc = r.per_class[c].class_accuracy;
        const int y = 10 + static_cast<int>(c) * bar;
        const int w = acc ? static_cast<int>(*acc * width + 0.5) : 0;
        s += "<text x=\"4\" y=\"" + std::to_string(y + 15) + "\">" + class_name(names, c) + "</text>\n";
        s += "<rect class=\"bar\" x=\"" + std::to_string(label) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
             std::to_string(w) + "\" height=\"" + std::to_string(bar - 4) + "\" fill=\"#4a78b5\"/>\n";
        s += "<text x=\"" + std::to_string(label + w + 4) + "\" y=\"" + std::to_string(y + 15) + "\">" +
             (acc ? fixed(100.0 * *acc, 1) + "%" : std::string(kUndefined)) + "</text>\n";
    }
    return s + "</svg>\n";
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path + "'");
}

} // namespace arnlstm::report
