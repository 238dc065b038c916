#pragma once

#include <functional>
#include <string>
#include <vector>

#include "arnlstm/numerics/ops.hpp"

namespace arnlstm {

/// Apply one parameterized stage to every time step. All steps read the same
/// parameters, so their gradients accumulate into a single block.
inline std::vector<Var> time_distributed(const std::function<Var(Var)>& stage, std::span<const Var> steps) {
    std::vector<Var> out;
    out.reserve(steps.size());
    Shape expected;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        Var y;
        try {
            y = stage(steps[s]);
        } catch (const ShapeError& e) {
            throw ShapeError("time_distributed: step " + std::to_string(s) + ": " + e.what());
        }
        if (s == 0) expected = y.value().shape();
        if (y.value().shape() != expected) {
            throw ShapeError("time_distributed: step " + std::to_string(s) + " produced " +
                             shape_string(y.value().shape()) + ", step 0 produced " + shape_string(expected));
        }
        out.push_back(y);
    }
    return out;
}

} // namespace arnlstm
