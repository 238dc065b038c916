#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "arnlstm/rng.hpp"
#include "arnlstm/skeleton/pose.hpp"

namespace arnlstm {

/// fold_of[i] is the test fold of sample i (dataset order).
struct FoldSplit {
    std::size_t folds = 5;
    std::vector<std::size_t> fold_of;

    std::vector<std::size_t> test_indices(std::size_t f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] == f) out.push_back(i);
        return out;
    }

    std::vector<std::size_t> train_indices(std::size_t f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] != f) out.push_back(i);
        return out;
    }
};

inline std::map<int, std::vector<std::size_t>> group_by_label(const std::vector<int>& labels,
                                                              const std::vector<std::size_t>& subset) {
    std::map<int, std::vector<std::size_t>> by;
    for (auto i : subset) by[labels.at(i)].push_back(i);
    return by;
}

/// Stratified k-fold assignment. Each class is shuffled and dealt round-robin,
/// continuing the deal where the previous class stopped so fold totals stay
/// balanced as well.
inline FoldSplit stratified_folds(const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("need at least 2 folds");
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    FoldSplit split{k, std::vector<std::size_t>(labels.size(), 0)};
    Rng rng(derive_seed(seed, "folds"));
    std::size_t offset = 0;
    for (auto& [label, members] : group_by_label(labels, all)) {
        if (members.size() < k) {
            throw DataError("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                            " samples, fewer than " + std::to_string(k) + " folds");
        }
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t i = 0; i < members.size(); ++i) split.fold_of[members[i]] = (offset + i) % k;
        offset = (offset + members.size()) % k;
    }
    return split;
}

inline FoldSplit stratified_folds(const std::vector<SkeletonSequence>& data, std::size_t k, std::uint64_t seed) {
    std::vector<int> labels;
    for (const auto& s : data) labels.push_back(s.label);
    return stratified_folds(labels, k, seed);
}

struct HoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// Per class, round(fraction·n) samples go to validation (at least one when
/// the class has two or more samples). Output index lists are sorted.
inline HoldoutSplit stratified_holdout(const std::vector<int>& labels, const std::vector<std::size_t>& subset,
                                       double fraction, std::uint64_t seed) {
    HoldoutSplit out;
    Rng rng(derive_seed(seed, "holdout"));
    for (auto& [label, members] : group_by_label(labels, subset)) {
        rng.shuffle(std::span<std::size_t>(members));
        auto nval = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
        if (nval == 0 && members.size() >= 2 && fraction > 0) nval = 1;
        if (nval >= members.size()) nval = members.size() - 1;
        for (std::size_t i = 0; i < members.size(); ++i) (i < nval ? out.validation : out.train).push_back(members[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

} // namespace arnlstm
