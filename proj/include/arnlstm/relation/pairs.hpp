#pragma once

#include <cstddef>
#include <vector>

#include "arnlstm/error.hpp"

namespace arnlstm {

/// A joint pair (first of `from_person`, second of `to_person`).
struct JointPair {
    std::size_t from_person = 0;
    std::size_t first = 0;
    std::size_t to_person = 0;
    std::size_t second = 0;

    friend bool operator==(const JointPair&, const JointPair&) = default;
};

/// Cross-person pairs in both directions: J² pairs (person 0 → person 1) in
/// lexicographic (i, k) order, then J² pairs (person 1 → person 0).
inline std::vector<JointPair> enumerate_inward_pairs(std::size_t joints) {
    if (joints < 1) throw ConfigError("inward pairs need at least one joint");
    std::vector<JointPair> out;
    out.reserve(2 * joints * joints);
    for (std::size_t dir = 0; dir < 2; ++dir)
        for (std::size_t i = 0; i < joints; ++i)
            for (std::size_t k = 0; k < joints; ++k) out.push_back({dir, i, 1 - dir, k});
    return out;
}

/// Within-person pairs (i, k), i < k, lexicographic; J(J−1)/2 of them.
/// The person fields are left at 0; callers apply the list to each person.
inline std::vector<JointPair> enumerate_outward_pairs(std::size_t joints) {
    if (joints < 2) throw ConfigError("outward pairs need at least two joints, got " + std::to_string(joints));
    std::vector<JointPair> out;
    out.reserve(joints * (joints - 1) / 2);
    for (std::size_t i = 0; i < joints; ++i)
        for (std::size_t k = i + 1; k < joints; ++k) out.push_back({0, i, 0, k});
    return out;
}

} // namespace arnlstm
