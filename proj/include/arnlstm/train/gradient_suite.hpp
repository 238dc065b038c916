#pragma once

#include <string>
#include <vector>

#include "arnlstm/numerics/gradcheck.hpp"
#include "arnlstm/streams/model.hpp"

namespace arnlstm {

struct GradientGroupResult {
    std::string group;
    std::size_t trials = 0;
    double worst_rel_error = 0.0;
    std::string worst_path;
    std::size_t coordinates = 0;
    std::size_t kinks = 0;
};

struct GradientSuiteConfig {
    std::size_t trials = 20;
    std::uint64_t seed = 0;
    double epsilon = 1e-5;
    /// Added to every analytic parameter gradient; nonzero only to exercise failure reporting.
    double grad_offset = 0.0;
};

namespace detail {

inline Tensor suite_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor t = Tensor::matrix(rows, cols);
    for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
    return t;
}

// Σ y ⊙ w with fixed random w.
inline Var suite_probe(Var y, std::uint64_t seed) {
    Rng rng(seed);
    return op::sum(op::mul(y, y.tape().constant(suite_matrix(y.rows(), y.cols(), rng))));
}

// Zero biases put units fed by all-dead relu rows exactly on the kink, where
// central differences read 0.5 against an analytic 0. Random biases move them off it.
inline void randomize_biases(ParamStore& ps, Rng& rng) {
    for (auto& [path, p] : ps)
        if (p.trainable && path.ends_with("/b"))
            for (double& v : p.value.data()) v = rng.uniform(-0.5, 0.5);
}

inline void keep_worst(GradientGroupResult& g, const GradCheckResult& r) {
    ++g.trials;
    g.coordinates += r.coordinates;
    g.kinks += r.kinks;
    if (r.max_rel_error >= g.worst_rel_error) {
        g.worst_rel_error = r.max_rel_error;
        g.worst_path = r.worst_path;
    }
}

} // namespace detail

/// Randomized central-difference checks for every layer family and the full
/// fused model. Each trial draws its own small shapes.
inline std::vector<GradientGroupResult> run_gradient_suite(const GradientSuiteConfig& cfg) {
    using detail::suite_matrix;
    using detail::suite_probe;
    std::vector<GradientGroupResult> out;
    out.reserve(8); // groups are held by reference below
    auto group = [&](const std::string& name) -> GradientGroupResult& {
        out.push_back({name, 0, 0.0, "", 0, 0});
        return out.back();
    };
    const double eps = cfg.epsilon, off = cfg.grad_offset;

    auto& affine = group("affine");
    auto& activation = group("activations");
    auto& softmax_ce = group("softmax_ce");
    auto& lstm = group("lstm");
    auto& pooling = group("pooling");
    auto& relation = group("relation");
    auto& tdlstm = group("td_lstm");
    auto& fusion = group("fusion");

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        Rng rng(derive_seed(cfg.seed, "gradient-suite/" + std::to_string(trial)));
        auto dim = [&](std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); };

        {
            ParamStore ps;
            Affine layer(ps, "affine", dim(1, 5), dim(1, 5), Activation::identity, {}, rng);
            const Tensor x = suite_matrix(dim(1, 4), layer.in_width(), rng);
            const auto ps_seed = rng.next();
            detail::keep_worst(affine, grad_check([&](Tape& t) { return suite_probe(layer.forward(t.constant(x)), ps_seed); },
                                                  ps, eps, off));
        }
        for (Activation a : {Activation::tanh, Activation::sigmoid, Activation::relu}) {
            ParamStore ps;
            ps.add("activation/x", suite_matrix(dim(1, 4), dim(1, 4), rng));
            const auto ps_seed = rng.next();
            detail::keep_worst(activation, grad_check([&](Tape& t) {
                return suite_probe(activate(t.param(ps.at("activation/x")), a), ps_seed);
            }, ps, eps, off));
        }
        {
            ParamStore ps;
            const std::size_t m = dim(1, 4), c = dim(2, 5);
            ps.add("softmax_ce/logits", suite_matrix(m, c, rng));
            std::vector<std::size_t> labels(m);
            for (auto& l : labels) l = rng.below(c);
            detail::keep_worst(softmax_ce, grad_check([&](Tape& t) {
                return op::cross_entropy(op::softmax(t.param(ps.at("softmax_ce/logits"))), labels);
            }, ps, eps, off));
        }
        {
            ParamStore ps;
            const std::size_t batch = dim(1, 3), steps = dim(1, 4);
            LstmCell cell(ps, "lstm", dim(1, 3), dim(1, 3), {}, true, rng);
            const Tensor x = suite_matrix(steps * batch, cell.input_width(), rng);
            const auto ps_seed = rng.next();
            detail::keep_worst(lstm, grad_check([&](Tape& t) {
                Rng unused(0);
                auto hs = lstm_forward_stacked(cell, t.constant(x), steps, 0.0, Mode::eval, unused);
                return suite_probe(op::concat_rows(hs), ps_seed);
            }, ps, eps, off));
        }
        for (PoolKind k : {PoolKind::average, PoolKind::sum, PoolKind::max, PoolKind::concatenate}) {
            ParamStore ps;
            const std::size_t g = dim(1, 3);
            ps.add("pooling/x", suite_matrix(g * dim(1, 3), dim(1, 3), rng));
            const auto ps_seed = rng.next();
            detail::keep_worst(pooling, grad_check([&](Tape& t) {
                return suite_probe(pool_rows(t.param(ps.at("pooling/x")), g, k), ps_seed);
            }, ps, eps, off));
        }
        for (RelationKind kind : {RelationKind::inward, RelationKind::outward, RelationKind::fused}) {
            ParamStore ps;
            const std::size_t joints = dim(2, 4), features = dim(1, 3), frames = dim(1, 2);
            EncoderConfig enc;
            enc.widths.assign(dim(1, 2), dim(2, 4));
            RelationConfig rc;
            rc.kind = kind;
            rc.head_width = dim(2, 4);
            rc.options.pool = static_cast<PoolKind>(rng.below(4));
            rc.options.reduce = rng.below(2) ? PairReduce::mean : PairReduce::sum;
            RelationStage stage(ps, "relation", features, joints, enc, rc, rng);
            detail::randomize_biases(ps, rng);
            const Tensor x = suite_matrix(frames * 2 * joints, features, rng);
            const auto ps_seed = rng.next();
            detail::keep_worst(relation, grad_check([&](Tape& t) {
                return suite_probe(stage.forward(t.constant(x)), ps_seed);
            }, ps, eps, off));
        }
        {
            ParamStore ps;
            BlockConfig bc;
            bc.joints = dim(2, 3);
            bc.features = dim(1, 3);
            bc.seq_len = dim(2, 3);
            bc.encoder.widths = {dim(2, 3)};
            bc.relation.head_width = dim(2, 3);
            bc.lstm.hidden = dim(1, 3);
            bc.lstm.depth = dim(1, 2);
            const std::size_t batch = dim(1, 2);
            TdLstmBlock block(ps, "td_lstm", bc, rng);
            detail::randomize_biases(ps, rng);
            const Tensor x = suite_matrix(batch * bc.seq_len * 2 * bc.joints, bc.features, rng);
            const auto ps_seed = rng.next(), drop_seed = rng.next();
            detail::keep_worst(tdlstm, grad_check([&](Tape& t) {
                Rng drop(drop_seed);
                auto hs = block.forward(t.constant(x), batch, Mode::train, drop);
                return suite_probe(op::concat_rows(hs), ps_seed);
            }, ps, eps, off));
        }
        {
            ModelConfig mc;
            mc.stream = StreamKind::fused;
            mc.classes = dim(2, 3);
            mc.joints = dim(2, 3);
            mc.seq_len = 2;
            mc.joint_modalities = {ModalityKind::joint};
            mc.temporal_modalities = {ModalityKind::joint_motion};
            mc.encoder_widths = {dim(2, 3)};
            mc.head_width = dim(2, 3);
            mc.lstm_hidden = dim(1, 3);
            mc.lstm_depth = 1;
            mc.zero_init_heads = false;
            FusedModel model(mc, rng.next());
            detail::randomize_biases(model.params(), rng);
            Batch b;
            b.size = dim(1, 2);
            for (std::size_t s = 0; s < 2; ++s) b.inputs.push_back(suite_matrix(b.size * 2 * 2 * mc.joints, 3, rng));
            for (std::size_t i = 0; i < b.size; ++i) b.labels.push_back(rng.below(mc.classes));
            const auto drop_seed = rng.next();
            detail::keep_worst(fusion, grad_check([&](Tape& t) {
                Rng drop(drop_seed);
                return model.forward(t, b, Mode::train, drop).loss;
            }, model.params(), eps, off));
        }
    }
    return out;
}

} // namespace arnlstm
