#pragma once

#include <string>
#include <vector>

#include "arnlstm/relation/relation.hpp"
#include "arnlstm/skeleton/temporal.hpp"
#include "arnlstm/tdlstm/lstm.hpp"

namespace arnlstm {

struct BlockConfig {
    std::size_t joints = 8;
    std::size_t features = 3;
    std::size_t seq_len = 20;
    EncoderConfig encoder;
    RelationConfig relation;
    LstmConfig lstm;
    /// Scale each step's relation feature by the center-peaked Gaussian weight.
    bool gaussian = true;
    /// 0 selects seq_len / 6.
    double sigma = 0.0;
};

/// Time-distributed relation stage followed by a stack of LSTM layers that
/// return full sequences.
///
/// Input rows are ordered (sample, step, person, joint) with `features`
/// columns. Frame weights are the normalized Gaussian weights times seq_len,
/// so a flat weighting would leave features unchanged.
class TdLstmBlock {
public:
    TdLstmBlock() = default;

    TdLstmBlock(ParamStore& store, const std::string& prefix, const BlockConfig& cfg, Rng& rng) : cfg_(cfg) {
        if (cfg.seq_len < 1) throw ConfigError("TD-LSTM block needs seq_len >= 1");
        if (cfg.lstm.depth < 1) throw ConfigError("TD-LSTM block needs at least one LSTM layer");
        relation_ = RelationStage(store, prefix, cfg.features, cfg.joints, cfg.encoder, cfg.relation, rng);
        std::size_t in = relation_.output_width();
        for (std::size_t l = 0; l < cfg.lstm.depth; ++l) {
            cells_.emplace_back(store, prefix + "/lstm_" + std::to_string(l), in, cfg.lstm.hidden, cfg.lstm.init,
                                cfg.lstm.forget_bias_one, rng);
            in = cfg.lstm.hidden;
        }
        frame_weight_.assign(cfg.seq_len, 1.0);
        if (cfg.gaussian) {
            const double sigma = cfg.sigma > 0 ? cfg.sigma : default_sigma(cfg.seq_len);
            const auto g = gaussian_weights(cfg.seq_len, sigma);
            for (std::size_t t = 0; t < cfg.seq_len; ++t)
                frame_weight_[t] = g.weights[t] * static_cast<double>(cfg.seq_len);
        }
    }

    /// Relation features for every (sample, step) frame: (B·T)×R.
    Var relation_features(Var input) const { return relation_.forward(input); }

    /// Hidden states of the top LSTM layer, one B×H Var per step.
    std::vector<Var> forward(Var input, std::size_t batch, Mode mode, Rng& rng) const {
        const std::size_t steps = cfg_.seq_len;
        const std::size_t expect_rows = batch * steps * 2 * cfg_.joints;
        if (input.rows() != expect_rows || input.cols() != cfg_.features) {
            throw ShapeError("TD-LSTM block expects input [" + std::to_string(expect_rows) + "x" +
                             std::to_string(cfg_.features) + "] for batch " + std::to_string(batch) + ", seq_len " +
                             std::to_string(steps) + ", got " + shape_string(input.value().shape()));
        }
        Var rel = relation_features(input); // rows (b, t)
        std::vector<double> weight(batch * steps);
        std::vector<std::size_t> step_major(batch * steps);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t t = 0; t < steps; ++t) {
                weight[b * steps + t] = frame_weight_[t];
                step_major[t * batch + b] = b * steps + t;
            }
        if (cfg_.gaussian) rel = op::scale_rows(rel, weight);
        Var x = op::gather_rows(rel, step_major); // rows (t, b)
        std::vector<Var> hs;
        for (std::size_t l = 0; l < cells_.size(); ++l) {
            hs = lstm_forward_stacked(cells_[l], x, steps, cfg_.lstm.dropout, mode, rng);
            if (l + 1 < cells_.size()) x = op::concat_rows(hs);
        }
        return hs;
    }

    const RelationStage& relation() const { return relation_; }
    const std::vector<LstmCell>& cells() const { return cells_; }
    const std::vector<double>& frame_weights() const { return frame_weight_; }
    std::size_t hidden_width() const { return cfg_.lstm.hidden; }
    const BlockConfig& config() const { return cfg_; }

private:
    BlockConfig cfg_;
    RelationStage relation_;
    std::vector<LstmCell> cells_;
    std::vector<double> frame_weight_;
};

/// Shape of one object (person) at one step: J joints × F features.
struct ObjectShape {
    std::size_t joints = 8;
    std::size_t features = 3;
};

/// Assemble a TD-LSTM block: pair encoder (optionally pruned), time-distributed
/// over seq_len steps of two-person input, then the recurrent stack.
inline TdLstmBlock build_td_lstm(ParamStore& store, const std::string& prefix, ObjectShape object, std::size_t seq_len,
                                 const std::string& prune_at_layer, const InitConfig& init, double dropout, Rng& rng,
                                 BlockConfig base = {}) {
    base.joints = object.joints;
    base.features = object.features;
    base.seq_len = seq_len;
    base.encoder.prune_at_layer = prune_at_layer;
    base.encoder.init = init;
    base.relation.init = init;
    base.lstm.init = init;
    base.lstm.dropout = dropout;
    return TdLstmBlock(store, prefix, base, rng);
}

} // namespace arnlstm
