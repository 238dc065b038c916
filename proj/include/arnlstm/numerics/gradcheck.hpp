#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "arnlstm/numerics/params.hpp"

namespace arnlstm {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_path;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
    /// Coordinates skipped because a kink lies within epsilon (see grad_check).
    std::size_t kinks = 0;
};

/// Relative error with a floor on the denominator so that two near-zero
/// gradients compare as equal instead of dividing round-off by round-off.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compare tape gradients of a scalar function against central differences
/// (f(θ+ε) − f(θ−ε)) / 2ε over every coordinate of every parameter.
/// `f` must build its graph on the tape it is given and return a 1×1 Var.
/// `grad_offset` is a fault-injection hook forwarded to the tape.
///
/// A relu or max kink within the step makes a central difference meaningless.
/// Kinks show up as one-sided slopes that disagree by more than
/// `kink_tolerance` relative (and well above round-off); a smooth f gives a
/// disagreement of only h·|f''|. Such a coordinate is probed again at h/10 and
/// h/100; the first step whose slopes agree supplies the numeric gradient. If
/// none does, a kink lies within epsilon/100: the coordinate is counted in
/// `kinks` and left out of the maximum. Zero tolerance disables the probing.
inline GradCheckResult grad_check(const std::function<Var(Tape&)>& f, ParamStore& params, double epsilon = 1e-5,
                                  double grad_offset = 0.0, double kink_tolerance = 1e-3) {
    if (!(epsilon > 0)) throw ConfigError("grad_check: epsilon must be positive");
    params.zero_grad();
    double base = 0.0;
    {
        Tape tape;
        tape.set_param_grad_offset(grad_offset);
        Var y = f(tape);
        base = y.value().item();
        if (!std::isfinite(base)) throw NumericError("grad_check: f is not finite at the base point");
        tape.backward(y);
    }
    auto eval = [&](const std::string& where) {
        Tape tape;
        const double v = f(tape).value().item();
        if (!std::isfinite(v)) throw NumericError("grad_check: f is not finite at probe " + where);
        return v;
    };
    GradCheckResult result;
    for (auto& [path, p] : params) {
        if (!p.trainable) continue;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double orig = p.value[i];
            p.value[i] = orig + epsilon;
            const double fp = eval(path + "[" + std::to_string(i) + "]+");
            p.value[i] = orig - epsilon;
            const double fm = eval(path + "[" + std::to_string(i) + "]-");
            p.value[i] = orig;
            ++result.coordinates;
            auto agree = [&](double plus, double minus, double h) {
                const double right = (plus - base) / h, left = (base - minus) / h;
                const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(base)) / h;
                const double jump = std::abs(right - left);
                return kink_tolerance <= 0 || jump <= noise ||
                       jump <= kink_tolerance * std::max(std::abs(right), std::abs(left));
            };
            double numeric = (fp - fm) / (2.0 * epsilon);
            bool smooth = agree(fp, fm, epsilon);
            double h = epsilon;
            for (int refine = 0; !smooth && refine < 2; ++refine) {
                h /= 10;
                p.value[i] = orig + h;
                const double hp = eval(path + "[" + std::to_string(i) + "]+");
                p.value[i] = orig - h;
                const double hm = eval(path + "[" + std::to_string(i) + "]-");
                p.value[i] = orig;
                numeric = (hp - hm) / (2.0 * h);
                smooth = agree(hp, hm, h);
            }
            if (!smooth) {
                ++result.kinks;
                continue;
            }
            const double err = relative_error(p.grad[i], numeric);
            if (err > result.max_rel_error || result.coordinates - result.kinks == 1) {
                result.max_rel_error = err;
                result.worst_path = path;
                result.worst_index = i;
                result.analytic = p.grad[i];
                result.numeric = numeric;
            }
        }
    }
    return result;
}

} // namespace arnlstm
