#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "arnlstm/skeleton/pose.hpp"

namespace arnlstm {

/// Unnormalized Gaussian density 1/(σ√2π) · exp(−x²/2σ²).
inline double gauss(double x, double sigma) {
    return std::exp(-x * x / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

struct GaussianWeights {
    double sigma = 1.0;
    std::vector<double> weights;
};

/// Center-peaked frame weights, w[t] ∝ gauss(t − (T−1)/2), normalized to sum 1.
inline GaussianWeights gaussian_weights(std::size_t length, double sigma) {
    if (length == 0) throw ConfigError("gaussian_weights: length must be at least 1");
    if (!(sigma > 0)) throw ConfigError("gaussian_weights: sigma must be positive");
    GaussianWeights g{sigma, std::vector<double>(length)};
    const double center = (static_cast<double>(length) - 1.0) / 2.0;
    // The prefactor cancels under normalization; dropping it avoids underflow for tiny σ.
    for (std::size_t t = 0; t < length; ++t) {
        const double x = static_cast<double>(t) - center;
        g.weights[t] = std::exp(-x * x / (2.0 * sigma * sigma));
    }
    double total = 0.0;
    for (std::size_t t = 0; t < (length + 1) / 2; ++t) total += (t == length - 1 - t) ? g.weights[t] : 2.0 * g.weights[t];
    for (double& w : g.weights) w /= total;
    return g;
}

/// Default σ places ±3σ at the sequence ends.
inline double default_sigma(std::size_t length) { return static_cast<double>(length) / 6.0; }

/// Uniform-stride indices round(k·(T−1)/(n−1)), half rounded up, in exact integer arithmetic.
inline std::vector<std::size_t> sample_indices(std::size_t frames, std::size_t target) {
    if (target < 2) throw ConfigError("sample_frames: target length must be at least 2");
    if (frames == 0) throw DataError("sample_frames: empty sequence");
    std::vector<std::size_t> idx(target);
    const std::size_t den = target - 1;
    for (std::size_t k = 0; k < target; ++k) idx[k] = (2 * k * (frames - 1) + den) / (2 * den);
    return idx;
}

inline PoseArray sample_frames(const PoseArray& pose, std::size_t target) {
    const auto idx = sample_indices(pose.frames, target);
    PoseArray out(target, pose.persons, pose.joints, pose.dims);
    const std::size_t fs = pose.frame_size();
    for (std::size_t k = 0; k < target; ++k)
        std::copy_n(pose.values.begin() + static_cast<std::ptrdiff_t>(idx[k] * fs), fs,
                    out.values.begin() + static_cast<std::ptrdiff_t>(k * fs));
    return out;
}

inline SkeletonSequence sample_frames(const SkeletonSequence& seq, std::size_t target) {
    return {seq.id, seq.label, sample_frames(seq.pose, target)};
}

} // namespace arnlstm
