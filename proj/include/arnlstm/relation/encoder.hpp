#pragma once

#include <string>
#include <vector>

#include "arnlstm/numerics/params.hpp"
#include "arnlstm/relation/pool.hpp"

namespace arnlstm {

struct EncoderConfig {
    std::vector<std::size_t> widths{128, 128};
    /// Layer names used for pruning; defaults to "dense_1", "dense_2", ...
    std::vector<std::string> names;
    Activation activation = Activation::relu;
    InitConfig init;
    /// When non-empty, truncate the encoder at the topmost layer whose name ends with this.
    std::string prune_at_layer;
};

namespace detail {

template <Activation A>
inline double activation_value(double z) {
    if constexpr (A == Activation::relu) return z > 0 ? z : 0.0;
    else if constexpr (A == Activation::tanh) return std::tanh(z);
    else if constexpr (A == Activation::sigmoid) return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    else return z;
}

// Derivative given the pre-activation z and the activation y.
template <Activation A>
inline double activation_slope(double z, double y) {
    if constexpr (A == Activation::relu) return z > 0 ? 1.0 : 0.0;
    else if constexpr (A == Activation::tanh) return 1.0 - y * y;
    else if constexpr (A == Activation::sigmoid) return y * (1.0 - y);
    else return 1.0;
}

struct PairKernelArgs {
    const double* top;
    const double* bottom;
    const double* bias;
    const std::size_t* first;
    const std::size_t* second;
    std::size_t segments, group, width;
    double scale;
};

template <Activation A>
void pair_forward_kernel(PairKernelArgs p, double* out) {
    const std::size_t n = p.width;
    for (std::size_t s = 0; s < p.segments; ++s) {
        double* o = out + s * n;
        for (std::size_t r = s * p.group; r < (s + 1) * p.group; ++r) {
            const double* ar = p.top + p.first[r] * n;
            const double* br = p.bottom + p.second[r] * n;
            for (std::size_t k = 0; k < n; ++k) o[k] += activation_value<A>(ar[k] + br[k] + p.bias[k]);
        }
        for (std::size_t k = 0; k < n; ++k) o[k] *= p.scale;
    }
}

// Restrict-qualified so the loop vectorizes without a runtime alias check.
// The relu derivative is a select: multiplying by a 0/1 slope compiles to a
// per-element branch.
template <Activation A>
inline void pair_derivative_row(const double* __restrict ar, const double* __restrict br,
                                const double* __restrict bias, const double* __restrict gs, double scale,
                                double* __restrict dq, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double z = ar[k] + br[k] + bias[k];
        const double gk = scale * gs[k];
        if constexpr (A == Activation::relu) dq[k] = z > 0 ? gk : 0.0;
        else dq[k] = gk * activation_slope<A>(z, activation_value<A>(z));
    }
}

// One segment's pair derivatives go to `d` (group × width) first; scattering
// them in a second pass keeps loads of top/bottom apart from gradient stores.
template <Activation A>
void pair_backward_kernel(PairKernelArgs p, const double* grad, double* d, double* ga, double* gb) {
    const std::size_t n = p.width;
    for (std::size_t s = 0; s < p.segments; ++s) {
        const double* gs = grad + s * n;
        for (std::size_t q = 0; q < p.group; ++q) {
            const std::size_t r = s * p.group + q;
            const double* ar = p.top + p.first[r] * n;
            const double* br = p.bottom + p.second[r] * n;
            pair_derivative_row<A>(ar, br, p.bias, gs, p.scale, d + q * n, n);
        }
        for (std::size_t q = 0; q < p.group; ++q) {
            const std::size_t r = s * p.group + q;
            const double* dq = d + q * n;
            double* gar = ga + p.first[r] * n;
            double* gbr = gb + p.second[r] * n;
            for (std::size_t k = 0; k < n; ++k) gar[k] += dq[k];
            for (std::size_t k = 0; k < n; ++k) gbr[k] += dq[k];
        }
    }
}

inline void pair_forward(Activation act, const PairKernelArgs& p, double* out) {
    switch (act) {
    case Activation::relu: return pair_forward_kernel<Activation::relu>(p, out);
    case Activation::tanh: return pair_forward_kernel<Activation::tanh>(p, out);
    case Activation::sigmoid: return pair_forward_kernel<Activation::sigmoid>(p, out);
    case Activation::identity: return pair_forward_kernel<Activation::identity>(p, out);
    }
}

inline void pair_backward(Activation act, const PairKernelArgs& p, const double* grad, double* d, double* ga,
                          double* gb) {
    switch (act) {
    case Activation::relu: return pair_backward_kernel<Activation::relu>(p, grad, d, ga, gb);
    case Activation::tanh: return pair_backward_kernel<Activation::tanh>(p, grad, d, ga, gb);
    case Activation::sigmoid: return pair_backward_kernel<Activation::sigmoid>(p, grad, d, ga, gb);
    case Activation::identity: return pair_backward_kernel<Activation::identity>(p, grad, d, ga, gb);
    }
}

/// Row s of the result reduces act(top[first[r]] + bottom[second[r]] + bias)
/// over the group of pairs r in [s·group, (s+1)·group). Pair rows are never
/// stored; the backward pass recomputes them.
inline Var pair_layer_reduce(Var top, Var bottom, Var bias, std::span<const std::size_t> first,
                             std::span<const std::size_t> second, std::size_t group, Activation act,
                             PairReduce reduce) {
    const std::size_t n = top.cols(), pairs = first.size();
    if (bottom.cols() != n || bias.value().size() != n || second.size() != pairs) {
        throw ShapeError("pair_layer_reduce: operand widths or index lengths disagree");
    }
    if (group == 0 || pairs % group != 0) throw ShapeError("pair_layer_reduce: pairs not divisible into groups");
    for (std::size_t r = 0; r < pairs; ++r) {
        if (first[r] >= top.rows() || second[r] >= bottom.rows()) throw ShapeError("pair_layer_reduce: index out of range");
    }
    const std::size_t segments = pairs / group;
    const double w = reduce == PairReduce::mean ? 1.0 / static_cast<double>(group) : 1.0;
    Tensor out = Tensor::matrix(segments, n);
    pair_forward(act,
                 {top.value().data().data(), bottom.value().data().data(), bias.value().data().data(), first.data(),
                  second.data(), segments, group, n, w},
                 out.data().data());
    const std::size_t ti = top.id(), bi = bottom.id(), ci = bias.id();
    return top.tape().record(
        std::move(out), {ti, bi, ci},
        [=, f = std::vector<std::size_t>(first.begin(), first.end()),
         g2 = std::vector<std::size_t>(second.begin(), second.end())](Tape& t, std::size_t self) {
            std::vector<double> ga(t.value(ti).size(), 0.0), gb(t.value(bi).size(), 0.0), d(group * n);
            pair_backward(act,
                          {t.value(ti).data().data(), t.value(bi).data().data(), t.value(ci).data().data(), f.data(),
                           g2.data(), segments, group, n, w},
                          t.grad(self).data().data(), d.data(), ga.data(), gb.data());
            if (t.requires_grad(ti)) {
                Tensor& dst = t.grad(ti);
                for (std::size_t i = 0; i < ga.size(); ++i) dst[i] += ga[i];
            }
            if (t.requires_grad(bi)) {
                Tensor& dst = t.grad(bi);
                for (std::size_t i = 0; i < gb.size(); ++i) dst[i] += gb[i];
            }
            // Every pair contributes its derivative once to the bias, as it does to top.
            if (t.requires_grad(ci)) {
                Tensor& dst = t.grad(ci);
                const std::size_t rows = ga.size() / n;
                for (std::size_t k = 0; k < n; ++k) {
                    double sum = 0.0;
                    for (std::size_t r = 0; r < rows; ++r) sum += ga[r * n + k];
                    dst[k] += sum;
                }
            }
        });
}

} // namespace detail

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Shared pair encoder g_θ: an MLP over a concatenated (first, second) joint
/// feature pair. One parameter block serves every pair of every frame.
class PairEncoder {
public:
    PairEncoder() = default;

    PairEncoder(ParamStore& store, const std::string& prefix, std::size_t feature_width, const EncoderConfig& cfg,
                Rng& rng)
        : feature_width_(feature_width) {
        if (cfg.widths.empty()) throw ConfigError("pair encoder needs at least one layer");
        if (!cfg.names.empty() && cfg.names.size() != cfg.widths.size()) {
            throw ConfigError("pair encoder: layer name count does not match layer count");
        }
        std::size_t in = 2 * feature_width;
        for (std::size_t l = 0; l < cfg.widths.size(); ++l) {
            std::string name = cfg.names.empty() ? "dense_" + std::to_string(l + 1) : cfg.names[l];
            layers_.emplace_back(store, prefix + "/" + name, in, cfg.widths[l], cfg.activation, cfg.init, rng);
            names_.push_back(std::move(name));
            in = cfg.widths[l];
        }
    }

    std::size_t feature_width() const { return feature_width_; }
    std::size_t input_width() const { return 2 * feature_width_; }
    std::size_t output_width() const { return layers_.back().out_width(); }
    std::size_t depth() const { return layers_.size(); }
    const std::vector<std::string>& layer_names() const { return names_; }
    const std::vector<Affine>& layers() const { return layers_; }

    /// First-layer halves x·W_top and x·W_bottom for every joint row. Pairs
    /// drawn from the same rows can share one projection.
    struct Projection {
        Var top;
        Var bottom;
    };

    Projection project(Var joints) const {
        if (joints.cols() != feature_width_) {
            throw ShapeError("pair encoder expects " + std::to_string(feature_width_) + " features per joint, got " +
                             std::to_string(joints.cols()));
        }
        Tape& t = joints.tape();
        Var w = t.param(layers_.front().weight());
        return {op::matmul(joints, op::slice_rows(w, 0, feature_width_)),
                op::matmul(joints, op::slice_rows(w, feature_width_, feature_width_))};
    }

    /// Encode pairs whose halves are rows of the projected joints: pair r pairs
    /// row first[r] with row second[r]. The first layer is applied as
    /// x_first·W_top + x_second·W_bottom, which equals the affine map of the
    /// concatenated pair without materializing it.
    Var encode(const Projection& p, std::span<const std::size_t> first, std::span<const std::size_t> second) const {
        const Affine& l0 = layers_.front();
        Var pre = op::add(op::gather_rows(p.top, first), op::gather_rows(p.bottom, second));
        Var h = activate(op::add_bias(pre, p.top.tape().param(l0.bias())), l0.activation());
        for (std::size_t l = 1; l < layers_.size(); ++l) h = layers_[l].forward(h);
        return h;
    }

    Var encode(Var joints, std::span<const std::size_t> first, std::span<const std::size_t> second) const {
        return encode(project(joints), first, second);
    }

    /// Encode pairs and reduce consecutive groups of `group` pairs to one row.
    /// A single-layer encoder takes a fused path that never stores pair rows.
    Var encode_reduce(const Projection& p, std::span<const std::size_t> first, std::span<const std::size_t> second,
                      std::size_t group, PairReduce reduce) const {
        if (layers_.size() > 1) {
            return op::segment_reduce(encode(p, first, second), group,
                                      reduce == PairReduce::mean ? op::Reduce::mean : op::Reduce::sum);
        }
        const Affine& l0 = layers_.front();
        return detail::pair_layer_reduce(p.top, p.bottom, p.top.tape().param(l0.bias()), first, second, group,
                                         l0.activation(), reduce);
    }

    Var encode_reduce(Var joints, std::span<const std::size_t> first, std::span<const std::size_t> second,
                      std::size_t group, PairReduce reduce) const {
        return encode_reduce(project(joints), first, second, group, reduce);
    }

    /// Reference path over explicit concatenated pair rows (pairs × 2F).
    Var encode_concatenated(Var pairs) const {
        Var h = pairs;
        for (const auto& layer : layers_) h = layer.forward(h);
        return h;
    }

    /// Parameter paths owned by layers above `keep` (used to drop pruned weights).
    std::vector<std::string> parameter_paths_above(std::size_t keep, const std::string& prefix) const {
        std::vector<std::string> out;
        for (std::size_t l = keep; l < names_.size(); ++l) {
            out.push_back(prefix + "/" + names_[l] + "/W");
            out.push_back(prefix + "/" + names_[l] + "/b");
        }
        return out;
    }

    /// Keep layers up to and including the topmost one whose name ends with
    /// `layer_name`, scanning from the output layer downwards.
    PairEncoder pruned(const std::string& layer_name) const {
        for (std::size_t l = layers_.size(); l-- > 0;) {
            if (ends_with(names_[l], layer_name)) {
                PairEncoder out = *this;
                out.layers_.resize(l + 1);
                out.names_.resize(l + 1);
                return out;
            }
        }
        throw ConfigError("prune_at_layer '" + layer_name + "' matches no encoder layer");
    }

private:
    std::size_t feature_width_ = 0;
    std::vector<Affine> layers_;
    std::vector<std::string> names_;
};

inline PairEncoder prune_encoder(const PairEncoder& enc, const std::string& layer_name) {
    return enc.pruned(layer_name);
}

} // namespace arnlstm
