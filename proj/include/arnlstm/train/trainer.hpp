#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "arnlstm/numerics/adam.hpp"
#include "arnlstm/skeleton/folds.hpp"
#include "arnlstm/streams/model.hpp"
#include "arnlstm/train/metrics.hpp"

namespace arnlstm {

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::uint64_t seed = 0;
    /// Fraction of each training fold held out for early stopping.
    double validation_fraction = 0.2;
    /// At equal validation accuracy, keep the snapshot with the lower
    /// validation loss. Patience still counts from the last accuracy increase.
    bool loss_tie_break = true;

    void validate() const {
        if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be >= 0");
        if (batch_size == 0) throw ConfigError("batch size must be positive");
        if (max_epochs == 0) throw ConfigError("max epochs must be positive");
        if (patience == 0) throw ConfigError("patience must be at least 1");
        if (!(validation_fraction > 0 && validation_fraction < 1)) {
            throw ConfigError("validation fraction must lie in (0, 1)");
        }
    }

    void apply(const KeyValueConfig& kv) {
        if (kv.contains("lr")) learning_rate = parse_double("lr", kv.get("lr"));
        if (kv.contains("batch")) batch_size = parse_count("batch", kv.get("batch"));
        if (kv.contains("max_epochs")) max_epochs = parse_count("max_epochs", kv.get("max_epochs"));
        if (kv.contains("patience")) patience = parse_count("patience", kv.get("patience"));
        if (kv.contains("seed")) seed = parse_count("seed", kv.get("seed"));
        if (kv.contains("loss_tie_break")) loss_tie_break = parse_switch("loss_tie_break", kv.get("loss_tie_break"));
        if (kv.contains("val_fraction")) validation_fraction = parse_double("val_fraction", kv.get("val_fraction"));
    }

    void store(KeyValueConfig& kv) const {
        kv.set("lr", format_double(learning_rate));
        kv.set("batch", std::to_string(batch_size));
        kv.set("max_epochs", std::to_string(max_epochs));
        kv.set("patience", std::to_string(patience));
        kv.set("seed", std::to_string(seed));
        kv.set("val_fraction", format_double(validation_fraction));
        kv.set("loss_tie_break", loss_tie_break ? "on" : "off");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    bool improved = false;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0.0;
    double best_val_loss = 0.0;
};

inline EvalReport evaluate(const Model& model, const PreparedDataset& data, std::span<const std::size_t> indices,
                           std::size_t batch_size = 64) {
    if (indices.empty()) throw DataError("evaluate: empty split");
    std::vector<std::size_t> labels;
    for (auto i : indices) labels.push_back(static_cast<std::size_t>(data.labels.at(i)));
    return evaluate_probabilities(model.predict(data, indices, batch_size), labels);
}

/// Fits input standardization on the training split, then runs mini-batch
/// Adam with seeded shuffling and early stopping on validation accuracy.
/// Patience counts epochs since the last strict accuracy increase. The kept
/// snapshot is the best-accuracy epoch, ties broken by lower validation loss
/// when loss_tie_break is set. On return the model holds that snapshot.
inline TrainResult train(Model& model, const PreparedDataset& data, std::span<const std::size_t> train_idx,
                         std::span<const std::size_t> val_idx, const TrainConfig& cfg) {
    cfg.validate();
    if (train_idx.empty()) throw DataError("train: empty training split");
    if (val_idx.empty()) throw DataError("train: empty validation split");
    model.fit_standardization(data, train_idx);
    ParamStore& params = model.params();
    AdamState adam;
    adam.learning_rate = cfg.learning_rate;
    Rng shuffle_rng(derive_seed(cfg.seed, "train/shuffle"));
    Rng dropout_rng(derive_seed(cfg.seed, "train/dropout"));
    std::vector<std::size_t> order(train_idx.begin(), train_idx.end());
    TrainResult result;
    std::map<std::string, Tensor> best;
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
            const std::size_t n = std::min(cfg.batch_size, order.size() - start);
            Batch batch = make_batch(data, std::span<const std::size_t>(order).subspan(start, n));
            Tape tape;
            Var loss = model.forward(tape, batch, Mode::train, dropout_rng).loss;
            const double lv = loss.value().item();
            if (!std::isfinite(lv)) {
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(b));
            }
            loss_sum += lv * static_cast<double>(n);
            params.zero_grad();
            tape.backward(loss);
            adam_step(adam, params);
        }
        const EvalReport val = evaluate(model, data, val_idx, cfg.batch_size);
        EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), val.mean_loss, val.accuracy, false};
        const bool more_accurate = epoch == 1 || val.accuracy > result.best_val_accuracy;
        const bool tie_better = cfg.loss_tie_break && val.accuracy == result.best_val_accuracy &&
                                val.mean_loss < result.best_val_loss;
        if (more_accurate || tie_better) {
            rec.improved = true;
            result.best_epoch = epoch;
            result.best_val_accuracy = val.accuracy;
            result.best_val_loss = val.mean_loss;
            best = params.snapshot();
        }
        since_best = more_accurate ? 0 : since_best + 1;
        result.history.push_back(rec);
        if (since_best >= cfg.patience) break;
    }
    params.restore(best);
    return result;
}

struct FoldResult {
    std::size_t fold = 0;
    TrainResult training;
    EvalReport test;
};

struct CrossValidationResult {
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    /// Population standard deviation over folds.
    double std_accuracy = 0.0;
};

/// Builds a fresh model for a fold.
using ModelFactory = std::function<std::unique_ptr<Model>(std::size_t fold)>;

/// Per fold: hold out a stratified validation slice from the training folds,
/// train with early stopping, then evaluate on the test fold.
inline CrossValidationResult cross_validate(const ModelFactory& factory, const std::vector<SkeletonSequence>& data,
                                            const BoneTopology& topo, const FoldSplit& split, const TrainConfig& cfg) {
    cfg.validate();
    if (split.fold_of.size() != data.size()) throw ConfigError("fold assignment does not match the dataset size");
    std::vector<int> labels;
    for (const auto& s : data) labels.push_back(s.label);
    CrossValidationResult out;
    for (std::size_t f = 0; f < split.folds; ++f) {
        auto model = factory(f);
        const PreparedDataset prepared = model->prepare_all(data, topo);
        const auto test = split.test_indices(f);
        const auto holdout =
            stratified_holdout(labels, split.train_indices(f), cfg.validation_fraction, derive_seed(cfg.seed, "fold/" + std::to_string(f)));
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, "fold-train/" + std::to_string(f));
        FoldResult r;
        r.fold = f;
        r.training = train(*model, prepared, holdout.train, holdout.validation, fold_cfg);
        r.test = evaluate(*model, prepared, test, cfg.batch_size);
        out.folds.push_back(std::move(r));
    }
    for (const auto& r : out.folds) out.mean_accuracy += r.test.accuracy;
    out.mean_accuracy /= static_cast<double>(out.folds.size());
    for (const auto& r : out.folds) out.std_accuracy += std::pow(r.test.accuracy - out.mean_accuracy, 2);
    out.std_accuracy = std::sqrt(out.std_accuracy / static_cast<double>(out.folds.size()));
    return out;
}

} // namespace arnlstm
