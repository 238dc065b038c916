#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "arnlstm/numerics/ops.hpp"

namespace arnlstm {

/// Named parameters keyed by slash-separated paths ("joint_stream/lstm_0/W").
/// std::map keeps node addresses stable, so layers may hold Parameter*.
class ParamStore {
public:
    ParamStore() = default;
    ParamStore(const ParamStore&) = delete;
    ParamStore& operator=(const ParamStore&) = delete;
    ParamStore(ParamStore&&) = default;
    ParamStore& operator=(ParamStore&&) = default;

    Parameter& add(const std::string& path, Tensor init) {
        auto [it, inserted] = params_.try_emplace(path, std::move(init));
        if (!inserted) throw ConfigError("duplicate parameter path '" + path + "'");
        return it->second;
    }

    /// Non-trainable state that must round-trip through checkpoints.
    Parameter& add_buffer(const std::string& path, Tensor init) {
        Parameter& p = add(path, std::move(init));
        p.trainable = false;
        return p;
    }

    Parameter& at(const std::string& path) {
        auto it = params_.find(path);
        if (it == params_.end()) throw ConfigError("unknown parameter path '" + path + "'");
        return it->second;
    }
    const Parameter& at(const std::string& path) const { return const_cast<ParamStore*>(this)->at(path); }

    void remove(const std::string& path) {
        if (params_.erase(path) == 0) throw ConfigError("unknown parameter path '" + path + "'");
    }

    bool contains(const std::string& path) const { return params_.contains(path); }
    std::size_t size() const { return params_.size(); }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    std::vector<std::string> paths() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : params_) out.push_back(k);
        return out;
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& [_, p] : params_) n += p.value.size();
        return n;
    }

    void zero_grad() {
        for (auto& [_, p] : params_) p.zero_grad();
    }

    std::map<std::string, Tensor> snapshot() const {
        std::map<std::string, Tensor> out;
        for (const auto& [k, p] : params_) out.emplace(k, p.value);
        return out;
    }

    /// Overwrite values from a path→tensor map; paths and shapes must match exactly.
    void restore(const std::map<std::string, Tensor>& values) {
        if (values.size() != params_.size()) {
            throw ConfigError("parameter set mismatch: have " + std::to_string(params_.size()) + ", got " +
                              std::to_string(values.size()));
        }
        for (auto& [k, p] : params_) {
            auto it = values.find(k);
            if (it == values.end()) throw ConfigError("missing parameter '" + k + "'");
            if (it->second.shape() != p.value.shape()) {
                throw ShapeError("parameter '" + k + "' has shape " + shape_string(p.value.shape()) + ", got " +
                                 shape_string(it->second.shape()));
            }
            p.value = it->second;
        }
    }

private:
    std::map<std::string, Parameter> params_;
};

enum class Activation { identity, relu, tanh, sigmoid };

inline Var activate(Var x, Activation a) {
    switch (a) {
    case Activation::relu: return op::relu(x);
    case Activation::tanh: return op::tanh(x);
    case Activation::sigmoid: return op::sigmoid(x);
    case Activation::identity: break;
    }
    return x;
}

/// Weight initialization for affine layers. A bound of 0 selects the scaled
/// uniform default √(6/(fan_in+fan_out)); zero_weights yields an all-zero layer.
struct InitConfig {
    double bound = 0.0;
    bool zero_weights = false;
};

inline Tensor uniform_init(std::size_t fan_in, std::size_t fan_out, const InitConfig& init, Rng& rng) {
    Tensor w = Tensor::matrix(fan_in, fan_out);
    if (init.zero_weights) return w;
    const double bound =
        init.bound > 0 ? init.bound : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    return w;
}

/// y = act(x·W + b) with W: in×out, b: 1×out.
class Affine {
public:
    Affine() = default;
    Affine(ParamStore& store, const std::string& path, std::size_t in, std::size_t out, Activation act,
           const InitConfig& init, Rng& rng)
        : weight_(&store.add(path + "/W", uniform_init(in, out, init, rng))),
          bias_(&store.add(path + "/b", Tensor::matrix(1, out))), act_(act), in_(in), out_(out) {}

    Var forward(Var x) const {
        Tape& t = x.tape();
        return activate(op::add_bias(op::matmul(x, t.param(*weight_)), t.param(*bias_)), act_);
    }

    Parameter& weight() const { return *weight_; }
    Parameter& bias() const { return *bias_; }
    Activation activation() const { return act_; }
    std::size_t in_width() const { return in_; }
    std::size_t out_width() const { return out_; }

private:
    Parameter* weight_ = nullptr;
    Parameter* bias_ = nullptr;
    Activation act_ = Activation::identity;
    std::size_t in_ = 0, out_ = 0;
};

} // namespace arnlstm
