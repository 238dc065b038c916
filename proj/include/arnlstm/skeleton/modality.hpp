#pragma once

#include <string>

#include "arnlstm/skeleton/pose.hpp"
#include "arnlstm/skeleton/topology.hpp"

namespace arnlstm {

/// bone[t,p,j] = joint[t,p,j] − joint[t,p,parent(j)]; the root bone is zero.
inline ModalityTensor derive_bone(const PoseArray& joints, const BoneTopology& topo) {
    if (topo.joints() != joints.joints) {
        throw ConfigError("topology has " + std::to_string(topo.joints()) + " joints, sequence has " +
                          std::to_string(joints.joints));
    }
    ModalityTensor out{ModalityKind::bone, PoseArray(joints.frames, joints.persons, joints.joints, joints.dims)};
    for (std::size_t t = 0; t < joints.frames; ++t)
        for (std::size_t p = 0; p < joints.persons; ++p)
            for (std::size_t j = 0; j < joints.joints; ++j) {
                const std::size_t parent = topo.parent(j);
                if (parent == j) continue;
                for (std::size_t d = 0; d < joints.dims; ++d)
                    out.values.at(t, p, j, d) = joints.at(t, p, j, d) - joints.at(t, p, parent, d);
            }
    return out;
}

inline ModalityTensor derive_bone(const SkeletonSequence& seq, const BoneTopology& topo) {
    return derive_bone(seq.pose, topo);
}

/// First-order frame difference: out[t] = m[t+1] − m[t].
inline ModalityTensor derive_motion(const ModalityTensor& m) {
    const PoseArray& in = m.values;
    if (in.frames < 2) throw DataError("motion needs at least 2 frames, got " + std::to_string(in.frames));
    if (is_motion(m.kind)) throw ConfigError("cannot derive motion from a motion modality");
    ModalityTensor out{m.kind == ModalityKind::joint ? ModalityKind::joint_motion : ModalityKind::bone_motion,
                       PoseArray(in.frames - 1, in.persons, in.joints, in.dims)};
    const std::size_t fs = in.frame_size();
    for (std::size_t t = 0; t + 1 < in.frames; ++t)
        for (std::size_t i = 0; i < fs; ++i) out.values.values[t * fs + i] = in.values[(t + 1) * fs + i] - in.values[t * fs + i];
    return out;
}

inline ModalityTensor derive_modality(const SkeletonSequence& seq, const BoneTopology& topo, ModalityKind kind) {
    switch (kind) {
    case ModalityKind::joint: return {ModalityKind::joint, seq.pose};
    case ModalityKind::bone: return derive_bone(seq, topo);
    case ModalityKind::joint_motion: return derive_motion({ModalityKind::joint, seq.pose});
    case ModalityKind::bone_motion: return derive_motion(derive_bone(seq, topo));
    }
    throw ConfigError("unknown modality");
}

} // namespace arnlstm
