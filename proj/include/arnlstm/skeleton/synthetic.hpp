#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "arnlstm/rng.hpp"
#include "arnlstm/skeleton/csv.hpp"
#include "arnlstm/skeleton/topology.hpp"

namespace arnlstm {

/// Parametric two-person interaction families.
enum class MotionFamily { approach, diverge, mirrored_wave, circling, push, handshake };

inline const std::array<MotionFamily, 6>& all_families() {
    static const std::array<MotionFamily, 6> f{MotionFamily::approach,  MotionFamily::diverge,
                                               MotionFamily::mirrored_wave, MotionFamily::circling,
                                               MotionFamily::push,      MotionFamily::handshake};
    return f;
}

inline std::string to_string(MotionFamily f) {
    switch (f) {
    case MotionFamily::approach: return "approach";
    case MotionFamily::diverge: return "diverge";
    case MotionFamily::mirrored_wave: return "mirrored-wave";
    case MotionFamily::circling: return "circling";
    case MotionFamily::push: return "push";
    case MotionFamily::handshake: return "handshake";
    }
    return "?";
}

inline MotionFamily parse_family(const std::string& s) {
    for (auto f : all_families())
        if (to_string(f) == s) return f;
    throw ConfigError("unknown motion family '" + s + "'");
}

struct SyntheticConfig {
    std::vector<MotionFamily> classes;
    std::size_t per_class = 40;
    std::size_t frames = 20;
    std::size_t joints = 8;
    double noise = 0.02;
    std::uint64_t seed = 0;

    /// The first `count` families in declaration order.
    static std::vector<MotionFamily> first_families(std::size_t count) {
        if (count < 2 || count > all_families().size()) {
            throw ConfigError("class count must be between 2 and " + std::to_string(all_families().size()));
        }
        return {all_families().begin(), all_families().begin() + static_cast<std::ptrdiff_t>(count)};
    }

    void validate() const {
        if (classes.size() < 2) throw ConfigError("synthetic data needs at least 2 classes");
        if (per_class == 0) throw ConfigError("sequences per class must be positive");
        if (frames < 2) throw ConfigError("synthetic sequences need at least 2 frames");
        if (joints < 4) throw ConfigError("synthetic skeletons need at least 4 joints");
        if (!(noise >= 0) || !std::isfinite(noise)) throw ConfigError("noise sigma must be a finite value >= 0");
    }
};

namespace detail {

struct BodyState {
    double x = 0, z = 0;    // ground position of the root
    double arm_angle = 0;   // radians; 0 = horizontal toward the partner, negative = down
    double arm_reach = 1.0; // scales arm segment length
};

// Writes one person's skeleton; `facing` is +1 for person 0 (looks toward +x), −1 for person 1.
inline void place_body(PoseArray& pose, std::size_t t, std::size_t person, const BodyState& s, double facing,
                       double size) {
    const std::size_t joints = pose.joints;
    const std::size_t spine = (joints + 1) / 2;
    const double seg = 0.25 * size;
    for (std::size_t k = 0; k < spine; ++k) {
        pose.at(t, person, k, 0) = s.x;
        pose.at(t, person, k, 1) = seg * static_cast<double>(k);
        pose.at(t, person, k, 2) = s.z;
    }
    const std::size_t shoulder = spine - 2;
    const double dx = facing * std::cos(s.arm_angle) * 0.2 * size * s.arm_reach;
    const double dy = std::sin(s.arm_angle) * 0.2 * size * s.arm_reach;
    for (std::size_t k = spine; k < joints; ++k) {
        const double steps = static_cast<double>(k - spine + 1);
        pose.at(t, person, k, 0) = pose.at(t, person, shoulder, 0) + steps * dx;
        pose.at(t, person, k, 1) = pose.at(t, person, shoulder, 1) + steps * dy;
        pose.at(t, person, k, 2) = s.z;
    }
}

inline double smoothstep(double a, double b, double u) {
    const double x = std::clamp((u - a) / (b - a), 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

} // namespace detail

/// One sequence of the given family, before noise and normalization.
inline PoseArray synthesize_motion(MotionFamily family, std::size_t frames, std::size_t joints, Rng& rng) {
    using detail::BodyState;
    using detail::deg;
    PoseArray pose(frames, 2, joints, 3);
    const double size = rng.uniform(0.9, 1.1);
    const double rest = deg(rng.uniform(-75, -65));
    const double phase = rng.uniform(0, 2 * std::numbers::pi);
    const double near_gap = rng.uniform(0.6, 0.8);
    const double far_gap = rng.uniform(1.7, 2.0);
    const double mid_gap = rng.uniform(1.1, 1.3);
    const double freq = rng.uniform(1.5, 2.5);
    const double radius = rng.uniform(0.3, 0.45);
    const double contact = rng.uniform(0.35, 0.45);
    for (std::size_t t = 0; t < frames; ++t) {
        const double u = frames > 1 ? static_cast<double>(t) / static_cast<double>(frames - 1) : 0.0;
        BodyState a{}, b{};
        a.arm_angle = b.arm_angle = rest;
        double gap = mid_gap;
        switch (family) {
        case MotionFamily::approach: gap = far_gap - (far_gap - near_gap) * u; break;
        case MotionFamily::diverge: gap = near_gap + (far_gap - near_gap) * u; break;
        case MotionFamily::mirrored_wave: {
            const double swing = deg(35) * std::sin(2 * std::numbers::pi * freq * u + phase);
            a.arm_angle = deg(45) + swing;
            b.arm_angle = deg(45) - swing;
            break;
        }
        case MotionFamily::circling: {
            const double ang = 2 * std::numbers::pi * u + phase;
            b.x = radius * std::cos(ang);
            b.z = radius * std::sin(ang);
            break;
        }
        case MotionFamily::push: {
            gap = near_gap + 0.2;
            const double reach = detail::smoothstep(0.0, contact, u) * (1.0 - detail::smoothstep(contact + 0.15, 1.0, u));
            a.arm_angle = rest + (deg(0) - rest) * reach;
            a.arm_reach = 1.0 + 0.3 * reach;
            b.x = 0.6 * detail::smoothstep(contact, contact + 0.25, u);
            break;
        }
        case MotionFamily::handshake: {
            gap = near_gap + 0.2;
            const double raise = detail::smoothstep(0.0, 0.5, u);
            const double shake = u > 0.5 ? deg(6) * std::sin(2 * std::numbers::pi * 3 * u + phase) : 0.0;
            a.arm_angle = rest + (deg(-15) - rest) * raise + shake;
            b.arm_angle = rest + (deg(-15) - rest) * raise + shake;
            break;
        }
        }
        a.x += -gap / 2;
        b.x += gap / 2;
        detail::place_body(pose, t, 0, a, +1.0, size);
        detail::place_body(pose, t, 1, b, -1.0, size);
    }
    return pose;
}

/// Deterministic two-person dataset: per_class sequences for each class, with
/// N(0, noise²) added to every coordinate before per-sequence normalization.
/// Class k is labelled k; ids are "seq00000", "seq00001", ... in class-major order.
inline std::vector<SkeletonSequence> generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    std::vector<SkeletonSequence> out;
    out.reserve(cfg.classes.size() * cfg.per_class);
    std::size_t serial = 0;
    for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
        for (std::size_t k = 0; k < cfg.per_class; ++k, ++serial) {
            Rng rng(derive_seed(cfg.seed, "synthetic/" + std::to_string(serial)));
            SkeletonSequence seq;
            char id[32];
            std::snprintf(id, sizeof id, "seq%05zu", serial);
            seq.id = id;
            seq.label = static_cast<int>(c);
            seq.pose = synthesize_motion(cfg.classes[c], cfg.frames, cfg.joints, rng);
            if (cfg.noise > 0)
                for (double& v : seq.pose.values) v += cfg.noise * rng.normal();
            normalize_sequence(seq);
            out.push_back(std::move(seq));
        }
    }
    return out;
}

/// Mean over all joints of a person at frame t.
inline std::array<double, 3> person_centroid(const PoseArray& pose, std::size_t t, std::size_t person) {
    std::array<double, 3> c{0, 0, 0};
    for (std::size_t j = 0; j < pose.joints; ++j)
        for (std::size_t d = 0; d < 3; ++d) c[d] += pose.at(t, person, j, d);
    for (double& v : c) v /= static_cast<double>(pose.joints);
    return c;
}

inline double centroid_distance(const PoseArray& pose, std::size_t t) {
    const auto a = person_centroid(pose, t, 0), b = person_centroid(pose, t, 1);
    return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

} // namespace arnlstm
