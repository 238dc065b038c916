#pragma once

#include <string>
#include <vector>

#include "arnlstm/relation/encoder.hpp"
#include "arnlstm/relation/pairs.hpp"
#include "arnlstm/relation/pool.hpp"

// Relational operators over two-person frames. A batch of n frames is passed
// as an (n·2·J)×F matrix whose rows are ordered (frame, person, joint).
namespace arnlstm {

enum class RelationKind { inward, outward, fused };

inline std::string to_string(RelationKind k) {
    switch (k) {
    case RelationKind::inward: return "inward";
    case RelationKind::outward: return "outward";
    case RelationKind::fused: return "inward_outward";
    }
    return "?";
}

inline RelationKind parse_relation(const std::string& s) {
    if (s == "inward") return RelationKind::inward;
    if (s == "outward") return RelationKind::outward;
    if (s == "inward_outward" || s == "fused" || s == "inward+outward") return RelationKind::fused;
    throw ConfigError("unknown relation '" + s + "' (expected inward, outward, inward_outward)");
}

/// f_φ head: one affine layer with activation.
using RelationHead = Affine;

struct RelationOptions {
    /// ⊕ between the two directional inward aggregates.
    PoolKind pool = PoolKind::average;
    /// How each Σ over pairs is reduced.
    PairReduce reduce = PairReduce::mean;
};

namespace detail {

inline std::size_t frame_count(Var frames, std::size_t joints) {
    const std::size_t per = 2 * joints;
    if (joints == 0 || frames.rows() % per != 0) {
        throw ShapeError("relation input has " + std::to_string(frames.rows()) + " rows, not a multiple of 2·J = " +
                         std::to_string(per));
    }
    return frames.rows() / per;
}

inline std::size_t joint_row(std::size_t frame, std::size_t person, std::size_t joint, std::size_t joints) {
    return (frame * 2 + person) * joints + joint;
}

/// Row indices for inward pairs, ordered (frame, direction, i, k).
inline void inward_index(std::size_t n, std::size_t joints, std::vector<std::size_t>& first,
                         std::vector<std::size_t>& second) {
    const auto pairs = enumerate_inward_pairs(joints);
    for (std::size_t f = 0; f < n; ++f)
        for (const auto& p : pairs) {
            first.push_back(joint_row(f, p.from_person, p.first, joints));
            second.push_back(joint_row(f, p.to_person, p.second, joints));
        }
}

/// Row indices for outward pairs, ordered (frame, person, pair).
inline void outward_index(std::size_t n, std::size_t joints, std::vector<std::size_t>& first,
                          std::vector<std::size_t>& second) {
    const auto pairs = enumerate_outward_pairs(joints);
    for (std::size_t f = 0; f < n; ++f)
        for (std::size_t person = 0; person < 2; ++person)
            for (const auto& p : pairs) {
                first.push_back(joint_row(f, person, p.first, joints));
                second.push_back(joint_row(f, person, p.second, joints));
            }
}

inline Var inward_combine(Var per_direction, const RelationOptions& opt) { // (n·2)×E
    return pool_rows(per_direction, 2, opt.pool);
}

inline Var outward_combine(Var per_person) { // (n·2)×E
    return op::reshape(per_person, per_person.rows() / 2, per_person.cols() * 2);
}

} // namespace detail

namespace detail {

inline Var inward_from(const PairEncoder::Projection& proj, const PairEncoder& enc, std::size_t n, std::size_t joints,
                       const RelationOptions& opt) {
    std::vector<std::size_t> first, second;
    inward_index(n, joints, first, second);
    return inward_combine(enc.encode_reduce(proj, first, second, joints * joints, opt.reduce), opt);
}

inline Var outward_from(const PairEncoder::Projection& proj, const PairEncoder& enc, std::size_t n,
                        std::size_t joints, const RelationOptions& opt) {
    std::vector<std::size_t> first, second;
    outward_index(n, joints, first, second);
    return outward_combine(enc.encode_reduce(proj, first, second, joints * (joints - 1) / 2, opt.reduce));
}

} // namespace detail

/// Pooled inward term Σg(j¹ᵢ, j²ₖ) ⊕ Σg(j²ᵢ, j¹ₖ) per frame: n×E (n×2E for concat).
inline Var inward_aggregate(Var frames, const PairEncoder& enc, std::size_t joints, const RelationOptions& opt = {}) {
    const std::size_t n = detail::frame_count(frames, joints);
    return detail::inward_from(enc.project(frames), enc, n, joints, opt);
}

/// Per-person within-person aggregates, concatenated person 0 then person 1: n×2E.
inline Var outward_aggregate(Var frames, const PairEncoder& enc, std::size_t joints, const RelationOptions& opt = {}) {
    const std::size_t n = detail::frame_count(frames, joints);
    return detail::outward_from(enc.project(frames), enc, n, joints, opt);
}

/// [inward aggregate | person-0 outward | person-1 outward]; both terms share
/// one first-layer projection.
inline Var fused_aggregate(Var frames, const PairEncoder& enc, std::size_t joints, const RelationOptions& opt = {}) {
    const std::size_t n = detail::frame_count(frames, joints);
    const auto proj = enc.project(frames);
    return op::concat_cols({detail::inward_from(proj, enc, n, joints, opt), detail::outward_from(proj, enc, n, joints, opt)});
}

inline Var arn_inward(Var frames, const PairEncoder& enc, const RelationHead& head, std::size_t joints,
                      const RelationOptions& opt = {}) {
    return head.forward(inward_aggregate(frames, enc, joints, opt));
}

inline Var arn_outward(Var frames, const PairEncoder& enc, const RelationHead& head, std::size_t joints,
                       const RelationOptions& opt = {}) {
    return head.forward(outward_aggregate(frames, enc, joints, opt));
}

inline Var arn_fused(Var frames, const PairEncoder& enc, const RelationHead& head, std::size_t joints,
                     const RelationOptions& opt = {}) {
    return head.forward(fused_aggregate(frames, enc, joints, opt));
}

/// Width of the head input for a relation kind and embedding width E.
inline std::size_t head_input_width(RelationKind kind, std::size_t embedding, PoolKind pool) {
    const std::size_t inward = pooled_width(embedding, 2, pool);
    switch (kind) {
    case RelationKind::inward: return inward;
    case RelationKind::outward: return 2 * embedding;
    case RelationKind::fused: return inward + 2 * embedding;
    }
    return 0;
}

struct RelationConfig {
    RelationKind kind = RelationKind::fused;
    RelationOptions options;
    std::size_t head_width = 128;
    Activation head_activation = Activation::relu;
    InitConfig init;
};

/// Per-frame relation stage: shared g_θ plus the f_φ head for the chosen kind.
class RelationStage {
public:
    RelationStage() = default;

    RelationStage(ParamStore& store, const std::string& prefix, std::size_t feature_width, std::size_t joints,
                  const EncoderConfig& enc_cfg, const RelationConfig& cfg, Rng& rng)
        : joints_(joints), cfg_(cfg) {
        if (joints < 2 && cfg.kind != RelationKind::inward) {
            throw ConfigError("outward relations need at least two joints");
        }
        encoder_ = PairEncoder(store, prefix + "/g_theta", feature_width, enc_cfg, rng);
        if (!enc_cfg.prune_at_layer.empty()) {
            PairEncoder pruned = encoder_.pruned(enc_cfg.prune_at_layer);
            for (const auto& path : encoder_.parameter_paths_above(pruned.depth(), prefix + "/g_theta"))
                store.remove(path);
            encoder_ = std::move(pruned);
        }
        const std::size_t in = head_input_width(cfg.kind, encoder_.output_width(), cfg.options.pool);
        head_ = RelationHead(store, prefix + "/" + head_name(cfg.kind), in, cfg.head_width, cfg.head_activation,
                             cfg.init, rng);
    }

    static std::string head_name(RelationKind k) {
        switch (k) {
        case RelationKind::inward: return "f_phi_inward";
        case RelationKind::outward: return "f_phi_outward";
        case RelationKind::fused: return "f_phi_fused";
        }
        return "f_phi";
    }

    Var head_input(Var frames) const {
        switch (cfg_.kind) {
        case RelationKind::inward: return inward_aggregate(frames, encoder_, joints_, cfg_.options);
        case RelationKind::outward: return outward_aggregate(frames, encoder_, joints_, cfg_.options);
        case RelationKind::fused: return fused_aggregate(frames, encoder_, joints_, cfg_.options);
        }
        throw ConfigError("unknown relation kind");
    }

    /// n frames in, n×head_width relation features out.
    Var forward(Var frames) const { return head_.forward(head_input(frames)); }

    const PairEncoder& encoder() const { return encoder_; }
    const RelationHead& head() const { return head_; }
    std::size_t joints() const { return joints_; }
    std::size_t output_width() const { return head_.out_width(); }
    const RelationConfig& config() const { return cfg_; }

private:
    std::size_t joints_ = 0;
    RelationConfig cfg_;
    PairEncoder encoder_;
    RelationHead head_;
};

} // namespace arnlstm
