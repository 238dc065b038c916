#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "arnlstm/skeleton/modality.hpp"
#include "arnlstm/skeleton/temporal.hpp"
#include "arnlstm/streams/config.hpp"
#include "arnlstm/tdlstm/block.hpp"

namespace arnlstm {

/// One stream's input for one sample: rows (step, person, joint), columns
/// (modality, coordinate). Each modality is derived from the full sequence
/// and then resampled to seq_len, so motion inputs also have seq_len steps.
inline Tensor stream_input(const SkeletonSequence& seq, const BoneTopology& topo,
                           std::span<const ModalityKind> modalities, std::size_t seq_len) {
    const PoseArray& pose = seq.pose;
    if (pose.persons != 2 || pose.dims != 3) {
        throw DataError("sequence '" + seq.id + "' must have 2 persons and 3 coordinates");
    }
    const std::size_t joints = pose.joints, width = 3 * modalities.size();
    Tensor out = Tensor::matrix(seq_len * 2 * joints, width);
    for (std::size_t m = 0; m < modalities.size(); ++m) {
        const PoseArray sampled = sample_frames(derive_modality(seq, topo, modalities[m]).values, seq_len);
        for (std::size_t t = 0; t < seq_len; ++t)
            for (std::size_t p = 0; p < 2; ++p)
                for (std::size_t j = 0; j < joints; ++j)
                    for (std::size_t d = 0; d < 3; ++d)
                        out.at((t * 2 + p) * joints + j, 3 * m + d) = sampled.at(t, p, j, d);
    }
    return out;
}

/// Model inputs for a dataset: inputs[i][s] is stream s of sample i.
struct PreparedDataset {
    std::vector<int> labels;
    std::vector<std::vector<Tensor>> inputs;

    std::size_t size() const { return labels.size(); }
};

struct Batch {
    std::size_t size = 0;
    std::vector<Tensor> inputs; // per stream, samples stacked along rows
    std::vector<std::size_t> labels;
};

inline Batch make_batch(const PreparedDataset& data, std::span<const std::size_t> indices) {
    if (indices.empty()) throw DataError("empty batch");
    Batch b;
    b.size = indices.size();
    const std::size_t streams = data.inputs.at(indices[0]).size();
    for (std::size_t s = 0; s < streams; ++s) {
        const Tensor& first = data.inputs[indices[0]][s];
        const std::size_t rows = first.rows(), cols = first.cols(), block = first.size();
        Tensor stacked = Tensor::matrix(rows * indices.size(), cols);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            const Tensor& x = data.inputs.at(indices[k]).at(s);
            if (x.shape() != first.shape()) throw ShapeError("batch samples have differing input shapes");
            std::copy(x.data().begin(), x.data().end(), stacked.data().begin() + static_cast<std::ptrdiff_t>(k * block));
        }
        b.inputs.push_back(std::move(stacked));
    }
    for (auto i : indices) b.labels.push_back(static_cast<std::size_t>(data.labels.at(i)));
    return b;
}

struct ModelOutput {
    Var logits;
    Var probs;
    /// Valid only when the batch carries labels.
    Var loss;
};

/// One TD-LSTM stream up to its pooled feature, with an optional per-step
/// auxiliary classifier.
class StreamBranch {
public:
    StreamBranch() = default;

    StreamBranch(ParamStore& store, const std::string& prefix, const ModelConfig& cfg,
                 const std::vector<ModalityKind>& modalities, bool auxiliary, std::uint64_t seed)
        : modalities_(modalities) {
        Rng rng(derive_seed(seed, prefix));
        BlockConfig b;
        b.joints = cfg.joints;
        b.features = 3 * modalities.size();
        b.seq_len = cfg.seq_len;
        b.encoder.widths = cfg.encoder_widths;
        b.encoder.prune_at_layer = cfg.prune_at_layer;
        b.relation.kind = cfg.relation;
        b.relation.options = {cfg.pool, cfg.pair_reduce};
        b.relation.head_width = cfg.head_width;
        b.lstm.hidden = cfg.lstm_hidden;
        b.lstm.depth = cfg.lstm_depth;
        b.lstm.dropout = cfg.dropout;
        b.gaussian = cfg.gaussian;
        b.sigma = cfg.sigma;
        block_ = TdLstmBlock(store, prefix, b, rng);
        pool_weight_.assign(cfg.seq_len, 1.0 / static_cast<double>(cfg.seq_len));
        if (cfg.temporal_pool == TemporalPool::gaussian) {
            pool_weight_ = gaussian_weights(cfg.seq_len, cfg.sigma > 0 ? cfg.sigma : default_sigma(cfg.seq_len)).weights;
        }
        if (cfg.standardize) {
            const std::size_t width = 3 * modalities.size();
            mean_ = &store.add_buffer(prefix + "/input_norm/mean", Tensor::matrix(1, width));
            inv_std_ = &store.add_buffer(prefix + "/input_norm/inv_std", Tensor::matrix(1, width, 1.0));
        }
        if (auxiliary) {
            InitConfig head_init;
            head_init.zero_weights = cfg.zero_init_heads;
            aux_ = Affine(store, prefix + "/aux_classifier", cfg.lstm_hidden, cfg.classes, Activation::identity,
                          head_init, rng);
            has_aux_ = true;
        }
    }

    struct Features {
        Var pooled;                // B×H
        std::vector<Var> hidden;   // T entries of B×H
    };

    /// Per-column (x − mean)·inv_std; identity when standardization is off.
    Tensor standardize(const Tensor& input) const {
        if (!mean_) return input;
        if (input.cols() != mean_->value.size()) {
            throw ShapeError("stream input has " + std::to_string(input.cols()) + " columns, expected " +
                             std::to_string(mean_->value.size()));
        }
        Tensor out = input;
        const std::size_t cols = out.cols();
        for (std::size_t r = 0; r < out.rows(); ++r)
            for (std::size_t c = 0; c < cols; ++c)
                out.at(r, c) = (out.at(r, c) - mean_->value[c]) * inv_std_->value[c];
        return out;
    }

    /// Fit the standardization buffers on the rows of the given samples'
    /// `stream` input. Columns with (near) zero spread keep inv_std = 1.
    void fit_standardization(const PreparedDataset& data, std::span<const std::size_t> indices, std::size_t stream) {
        if (!mean_) return;
        if (indices.empty()) throw DataError("standardization needs at least one sample");
        const std::size_t cols = mean_->value.size();
        std::vector<double> sum(cols, 0.0), sq(cols, 0.0);
        double rows = 0;
        for (auto i : indices) {
            const Tensor& x = data.inputs.at(i).at(stream);
            if (x.cols() != cols) throw ShapeError("stream input column count differs from the model");
            for (std::size_t r = 0; r < x.rows(); ++r) {
                rows += 1;
                for (std::size_t c = 0; c < cols; ++c) sum[c] += x.at(r, c);
            }
        }
        for (std::size_t c = 0; c < cols; ++c) sum[c] /= rows;
        for (auto i : indices) {
            const Tensor& x = data.inputs[i][stream];
            for (std::size_t r = 0; r < x.rows(); ++r)
                for (std::size_t c = 0; c < cols; ++c) sq[c] += (x.at(r, c) - sum[c]) * (x.at(r, c) - sum[c]);
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const double sd = std::sqrt(sq[c] / rows);
            mean_->value[c] = sum[c];
            inv_std_->value[c] = sd > kMinSpread ? 1.0 / sd : 1.0;
        }
    }

    static constexpr double kMinSpread = 1e-8;

    Features forward(Var input, std::size_t batch, Mode mode, Rng& rng) const {
        auto hs = block_.forward(input, batch, mode, rng);
        return {op::weighted_sum(hs, pool_weight_), std::move(hs)};
    }

    /// Mean over steps of the per-step cross-entropy.
    Var aux_loss(const std::vector<Var>& hidden, std::span<const std::size_t> labels) const {
        std::vector<std::size_t> repeated;
        for (std::size_t t = 0; t < hidden.size(); ++t) repeated.insert(repeated.end(), labels.begin(), labels.end());
        return op::cross_entropy(op::softmax(aux_.forward(op::concat_rows(hidden))), repeated);
    }

    bool has_aux() const { return has_aux_; }
    const TdLstmBlock& block() const { return block_; }
    const std::vector<ModalityKind>& modalities() const { return modalities_; }
    const std::vector<double>& pool_weights() const { return pool_weight_; }
    std::size_t feature_width() const { return block_.hidden_width(); }

private:
    std::vector<ModalityKind> modalities_;
    TdLstmBlock block_;
    std::vector<double> pool_weight_;
    Affine aux_;
    bool has_aux_ = false;
    Parameter* mean_ = nullptr;
    Parameter* inv_std_ = nullptr;
};

/// Common interface of the single-stream and fused models.
class Model {
public:
    virtual ~Model() = default;

    /// Per-stream inputs for one sample.
    virtual std::vector<Tensor> prepare(const SkeletonSequence& seq, const BoneTopology& topo) const = 0;
    virtual ModelOutput forward(Tape& tape, const Batch& batch, Mode mode, Rng& rng) const = 0;
    /// Fit input standardization on the training samples; no-op when off.
    virtual void fit_standardization(const PreparedDataset& data, std::span<const std::size_t> train_indices) = 0;

    const ModelConfig& config() const { return cfg_; }
    std::size_t classes() const { return cfg_.classes; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    PreparedDataset prepare_all(const std::vector<SkeletonSequence>& data, const BoneTopology& topo) const {
        PreparedDataset out;
        for (const auto& s : data) {
            if (s.label < 0 || static_cast<std::size_t>(s.label) >= cfg_.classes) {
                throw DataError("sequence '" + s.id + "' has class " + std::to_string(s.label) + " but the model has " +
                                std::to_string(cfg_.classes) + " classes");
            }
            if (s.joints() != cfg_.joints) {
                throw DataError("sequence '" + s.id + "' has " + std::to_string(s.joints()) +
                                " joints but the model expects " + std::to_string(cfg_.joints));
            }
            out.labels.push_back(s.label);
            out.inputs.push_back(prepare(s, topo));
        }
        return out;
    }

    /// Eval-mode class probabilities for the given samples, N×C in index order.
    Tensor predict(const PreparedDataset& data, std::span<const std::size_t> indices, std::size_t batch_size = 64) const {
        Tensor out = Tensor::matrix(indices.size(), cfg_.classes);
        Rng unused(0);
        for (std::size_t start = 0; start < indices.size(); start += batch_size) {
            const std::size_t n = std::min(batch_size, indices.size() - start);
            Batch b = make_batch(data, indices.subspan(start, n));
            Tape tape;
            const Tensor& p = forward(tape, b, Mode::eval, unused).probs.value();
            std::copy(p.data().begin(), p.data().end(),
                      out.data().begin() + static_cast<std::ptrdiff_t>(start * cfg_.classes));
        }
        return out;
    }

protected:
    explicit Model(const ModelConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

    InitConfig head_init() const {
        InitConfig init;
        init.zero_weights = cfg_.zero_init_heads;
        return init;
    }

    static void check_batch(const Batch& b, std::size_t streams) {
        if (b.inputs.size() != streams) {
            throw ShapeError("model expects " + std::to_string(streams) + " stream inputs, got " +
                             std::to_string(b.inputs.size()));
        }
        if (!b.labels.empty() && b.labels.size() != b.size) throw ShapeError("batch label count differs from size");
    }

    ModelConfig cfg_;
    ParamStore store_;
};

/// Joint or temporal stream alone: TD-LSTM → temporal pooling → classifier.
/// The joint stream adds the weighted per-step auxiliary loss.
class StreamModel : public Model {
public:
    StreamModel(const ModelConfig& cfg, std::uint64_t seed) : Model(cfg) {
        if (cfg.stream == StreamKind::fused) throw ConfigError("StreamModel needs stream joint or temporal");
        const bool joint = cfg.stream == StreamKind::joint;
        branch_ = StreamBranch(store_, joint ? "joint_stream" : "temporal_stream", cfg_,
                               joint ? cfg.joint_modalities : cfg.temporal_modalities,
                               joint && cfg.aux_loss_weight > 0, seed);
        Rng rng(derive_seed(seed, "classifier"));
        classifier_ = Affine(store_, "classifier", branch_.feature_width(), cfg.classes, Activation::identity,
                             head_init(), rng);
    }

    std::vector<Tensor> prepare(const SkeletonSequence& seq, const BoneTopology& topo) const override {
        return {stream_input(seq, topo, branch_.modalities(), cfg_.seq_len)};
    }

    ModelOutput forward(Tape& tape, const Batch& batch, Mode mode, Rng& rng) const override {
        check_batch(batch, 1);
        auto f = branch_.forward(tape.constant(branch_.standardize(batch.inputs[0])), batch.size, mode, rng);
        ModelOutput out;
        out.logits = classifier_.forward(f.pooled);
        out.probs = op::softmax(out.logits);
        if (!batch.labels.empty()) {
            out.loss = op::cross_entropy(out.probs, batch.labels);
            if (branch_.has_aux()) {
                out.loss = op::add(out.loss, op::scale(branch_.aux_loss(f.hidden, batch.labels), cfg_.aux_loss_weight));
            }
        }
        return out;
    }

    void fit_standardization(const PreparedDataset& data, std::span<const std::size_t> train_indices) override {
        branch_.fit_standardization(data, train_indices, 0);
    }

    const StreamBranch& branch() const { return branch_; }
    const Affine& classifier() const { return classifier_; }

private:
    StreamBranch branch_;
    Affine classifier_;
};

/// Joint and temporal streams fused by one affine layer over their
/// concatenated pooled features, followed by softmax.
class FusedModel : public Model {
public:
    FusedModel(const ModelConfig& cfg, std::uint64_t seed) : Model(cfg) {
        if (cfg.stream != StreamKind::fused) throw ConfigError("FusedModel needs stream fused");
        joint_ = StreamBranch(store_, "joint_stream", cfg_, cfg.joint_modalities, cfg.aux_loss_weight > 0, seed);
        temporal_ = StreamBranch(store_, "temporal_stream", cfg_, cfg.temporal_modalities, false, seed);
        Rng rng(derive_seed(seed, "fusion"));
        fusion_ = Affine(store_, "fusion", fusion_width(), cfg.classes, Activation::identity, head_init(), rng);
    }

    std::size_t fusion_width() const { return joint_.feature_width() + temporal_.feature_width(); }

    std::vector<Tensor> prepare(const SkeletonSequence& seq, const BoneTopology& topo) const override {
        return {stream_input(seq, topo, joint_.modalities(), cfg_.seq_len),
                stream_input(seq, topo, temporal_.modalities(), cfg_.seq_len)};
    }

    ModelOutput forward(Tape& tape, const Batch& batch, Mode mode, Rng& rng) const override {
        check_batch(batch, 2);
        auto fj = joint_.forward(tape.constant(joint_.standardize(batch.inputs[0])), batch.size, mode, rng);
        auto ft = temporal_.forward(tape.constant(temporal_.standardize(batch.inputs[1])), batch.size, mode, rng);
        Var fused = op::concat_cols({fj.pooled, ft.pooled});
        if (fused.cols() != fusion_.in_width()) {
            throw ShapeError("fusion input width " + std::to_string(fused.cols()) + ", expected " +
                             std::to_string(fusion_.in_width()));
        }
        ModelOutput out;
        out.logits = fusion_.forward(fused);
        out.probs = op::softmax(out.logits);
        if (!batch.labels.empty()) {
            out.loss = op::cross_entropy(out.probs, batch.labels);
            if (joint_.has_aux()) {
                out.loss = op::add(out.loss, op::scale(joint_.aux_loss(fj.hidden, batch.labels), cfg_.aux_loss_weight));
            }
        }
        return out;
    }

    void fit_standardization(const PreparedDataset& data, std::span<const std::size_t> train_indices) override {
        joint_.fit_standardization(data, train_indices, 0);
        temporal_.fit_standardization(data, train_indices, 1);
    }

    const StreamBranch& joint_branch() const { return joint_; }
    const StreamBranch& temporal_branch() const { return temporal_; }
    const Affine& fusion() const { return fusion_; }

private:
    StreamBranch joint_;
    StreamBranch temporal_;
    Affine fusion_;
};

inline std::unique_ptr<Model> make_model(const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.stream == StreamKind::fused) return std::make_unique<FusedModel>(cfg, seed);
    return std::make_unique<StreamModel>(cfg, seed);
}

/// Validate ensemble weights and rescale them onto the simplex.
inline std::vector<double> simplex_weights(const std::vector<double>& weights, std::size_t members) {
    if (weights.size() != members) {
        throw ConfigError("ensemble has " + std::to_string(members) + " members but " +
                          std::to_string(weights.size()) + " weights");
    }
    double total = 0;
    for (double w : weights) {
        if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("ensemble weights must be finite and non-negative");
        total += w;
    }
    if (!(total > 0)) throw ConfigError("ensemble weights must not all be zero");
    std::vector<double> out(weights);
    for (double& w : out) w /= total;
    return out;
}

inline std::vector<double> uniform_weights(std::size_t members) {
    return std::vector<double>(members, 1.0 / static_cast<double>(members));
}

/// Weighted average of member probability matrices (N×C each).
inline Tensor ensemble_average(std::span<const Tensor> member_probs, std::span<const double> weights) {
    if (member_probs.empty()) throw ConfigError("ensemble has no members");
    if (weights.size() != member_probs.size()) throw ConfigError("ensemble weight count differs from member count");
    const Tensor& first = member_probs[0];
    Tensor out(first.shape(), 0.0);
    for (std::size_t m = 0; m < member_probs.size(); ++m) {
        const Tensor& p = member_probs[m];
        if (p.cols() != first.cols()) {
            throw ConfigError("ensemble member " + std::to_string(m) + " predicts " + std::to_string(p.cols()) +
                              " classes, member 0 predicts " + std::to_string(first.cols()));
        }
        if (p.rows() != first.rows()) throw ShapeError("ensemble members scored different sample counts");
        for (std::size_t i = 0; i < p.size(); ++i) out[i] += weights[m] * p[i];
    }
    return out;
}

/// Per-modality member configuration: both streams consume only `m`.
inline ModelConfig member_config(ModelConfig base, ModalityKind m) {
    base.joint_modalities = {m};
    base.temporal_modalities = {m};
    return base;
}

/// Score-level ensemble of independently trained models.
struct Ensemble {
    std::vector<std::unique_ptr<Model>> members;
    std::vector<double> weights;

    /// Each member scores its own prepared view of the same samples.
    Tensor predict(std::span<const PreparedDataset> prepared, std::span<const std::size_t> indices) const {
        if (prepared.size() != members.size()) throw ConfigError("one prepared dataset per ensemble member required");
        for (std::size_t m = 1; m < members.size(); ++m) {
            if (members[m]->classes() != members[0]->classes()) {
                throw ConfigError("ensemble members disagree on class count");
            }
        }
        std::vector<Tensor> probs;
        for (std::size_t m = 0; m < members.size(); ++m) probs.push_back(members[m]->predict(prepared[m], indices));
        return ensemble_average(probs, weights);
    }
};

} // namespace arnlstm
