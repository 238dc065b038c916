#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "arnlstm/error.hpp"

namespace arnlstm {

/// T frames × P persons × J joints × D coordinates, row-major.
struct PoseArray {
    std::size_t frames = 0;
    std::size_t persons = 2;
    std::size_t joints = 0;
    std::size_t dims = 3;
    std::vector<double> values;

    PoseArray() = default;
    PoseArray(std::size_t t, std::size_t p, std::size_t j, std::size_t d = 3)
        : frames(t), persons(p), joints(j), dims(d), values(t * p * j * d, 0.0) {}

    std::size_t index(std::size_t t, std::size_t p, std::size_t j, std::size_t d) const {
        return ((t * persons + p) * joints + j) * dims + d;
    }
    double& at(std::size_t t, std::size_t p, std::size_t j, std::size_t d) { return values[index(t, p, j, d)]; }
    double at(std::size_t t, std::size_t p, std::size_t j, std::size_t d) const { return values[index(t, p, j, d)]; }

    std::size_t frame_size() const { return persons * joints * dims; }

    bool same_layout(const PoseArray& o) const {
        return frames == o.frames && persons == o.persons && joints == o.joints && dims == o.dims;
    }

    friend bool operator==(const PoseArray&, const PoseArray&) = default;
};

/// One labelled two-person sample. The second person is zero-filled when absent.
struct SkeletonSequence {
    std::string id;
    int label = 0;
    PoseArray pose;

    std::size_t frames() const { return pose.frames; }
    std::size_t joints() const { return pose.joints; }

    friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;
};

enum class ModalityKind { joint, bone, joint_motion, bone_motion };

inline std::string to_string(ModalityKind k) {
    switch (k) {
    case ModalityKind::joint: return "joint";
    case ModalityKind::bone: return "bone";
    case ModalityKind::joint_motion: return "joint-motion";
    case ModalityKind::bone_motion: return "bone-motion";
    }
    return "?";
}

inline ModalityKind parse_modality(const std::string& s) {
    if (s == "joint") return ModalityKind::joint;
    if (s == "bone") return ModalityKind::bone;
    if (s == "joint-motion" || s == "joint_motion") return ModalityKind::joint_motion;
    if (s == "bone-motion" || s == "bone_motion") return ModalityKind::bone_motion;
    throw ConfigError("unknown modality '" + s + "' (expected joint, bone, joint-motion, bone-motion)");
}

inline bool is_motion(ModalityKind k) { return k == ModalityKind::joint_motion || k == ModalityKind::bone_motion; }

/// A derived view of a sequence. Motion kinds carry one frame fewer than the source.
struct ModalityTensor {
    ModalityKind kind = ModalityKind::joint;
    PoseArray values;
};

} // namespace arnlstm
