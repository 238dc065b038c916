#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "arnlstm/numerics/ops.hpp"

namespace arnlstm {

enum class PoolKind { average, sum, max, concatenate };

inline std::string to_string(PoolKind k) {
    switch (k) {
    case PoolKind::average: return "avg";
    case PoolKind::sum: return "sum";
    case PoolKind::max: return "max";
    case PoolKind::concatenate: return "concat";
    }
    return "?";
}

inline PoolKind parse_pool(const std::string& s) {
    if (s == "avg" || s == "average") return PoolKind::average;
    if (s == "sum") return PoolKind::sum;
    if (s == "max") return PoolKind::max;
    if (s == "concat" || s == "concatenate") return PoolKind::concatenate;
    throw ConfigError("unknown pool kind '" + s + "' (expected avg, sum, max, concat)");
}

/// Reduction of the per-pair sums inside each relation term.
enum class PairReduce { mean, sum };

inline std::string to_string(PairReduce r) { return r == PairReduce::mean ? "mean" : "sum"; }

inline PairReduce parse_pair_reduce(const std::string& s) {
    if (s == "mean") return PairReduce::mean;
    if (s == "sum") return PairReduce::sum;
    throw ConfigError("unknown pair reduction '" + s + "' (expected mean, sum)");
}

/// Pool a list of equal-width vectors.
inline std::vector<double> pool(const std::vector<std::vector<double>>& items, PoolKind kind) {
    if (items.empty()) throw ShapeError("pool: empty operand list");
    const std::size_t width = items.front().size();
    for (const auto& v : items)
        if (v.size() != width) throw ShapeError("pool: operands have different widths");
    if (kind == PoolKind::concatenate) {
        std::vector<double> out;
        for (const auto& v : items) out.insert(out.end(), v.begin(), v.end());
        return out;
    }
    std::vector<double> out = items.front();
    for (std::size_t k = 1; k < items.size(); ++k)
        for (std::size_t c = 0; c < width; ++c)
            out[c] = kind == PoolKind::max ? std::max(out[c], items[k][c]) : out[c] + items[k][c];
    if (kind == PoolKind::average)
        for (double& v : out) v /= static_cast<double>(items.size());
    return out;
}

/// Traced pooling over consecutive row groups of `group` rows. Concatenate
/// lays the group's rows side by side (order preserved).
inline Var pool_rows(Var rows, std::size_t group, PoolKind kind) {
    switch (kind) {
    case PoolKind::average: return op::segment_reduce(rows, group, op::Reduce::mean);
    case PoolKind::sum: return op::segment_reduce(rows, group, op::Reduce::sum);
    case PoolKind::max: return op::segment_reduce(rows, group, op::Reduce::max);
    case PoolKind::concatenate: return op::reshape(rows, rows.rows() / group, rows.cols() * group);
    }
    throw ConfigError("unknown pool kind");
}

/// Width after pooling `group` rows of width `width`.
inline std::size_t pooled_width(std::size_t width, std::size_t group, PoolKind kind) {
    return kind == PoolKind::concatenate ? width * group : width;
}

} // namespace arnlstm
