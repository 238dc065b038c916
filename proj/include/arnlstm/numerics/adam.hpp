#pragma once

#include <cmath>
#include <map>
#include <string>

#include "arnlstm/numerics/params.hpp"

namespace arnlstm {

struct AdamState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step_count = 0;
    std::map<std::string, Tensor> first_moment;
    std::map<std::string, Tensor> second_moment;
};

/// One bias-corrected Adam update of every parameter from its accumulated grad.
inline void adam_step(AdamState& state, ParamStore& params) {
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (auto& [path, p] : params) {
        if (!p.trainable) continue;
        if (p.grad.shape() != p.value.shape()) {
            throw ShapeError("adam: gradient " + shape_string(p.grad.shape()) + " does not match parameter '" + path +
                             "' " + shape_string(p.value.shape()));
        }
        auto& m = state.first_moment.try_emplace(path, p.value.shape()).first->second;
        auto& v = state.second_moment.try_emplace(path, p.value.shape()).first->second;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p.value[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

} // namespace arnlstm
