#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arnlstm/numerics/tape.hpp"
#include "arnlstm/rng.hpp"

// Differentiable operations on rank-2 tensors. Sequences and batches are
// flattened into rows by the callers; no broadcasting beyond 1×1 scalars
// (add_bias is the one explicit row-broadcast used by affine layers).
namespace arnlstm::op {

namespace detail {

inline void require_matrix(const Tensor& t, const char* what) {
    if (t.rank() != 2) throw ShapeError(std::string(what) + ": expected a matrix, got " + shape_string(t.shape()));
}

inline void require_same(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
}

inline bool is_scalar(const Tensor& t) { return t.size() == 1; }

// out[i] += g[i]·d(x[i], y[i]). Restrict-qualified so the loop vectorizes; the
// output is always a gradient buffer distinct from g, x and y.
template <class D>
inline void accumulate_product(const double* __restrict g, const double* __restrict x, const double* __restrict y,
                               double* __restrict out, std::size_t n, D d) {
    for (std::size_t i = 0; i < n; ++i) out[i] += g[i] * d(x[i], y[i]);
}

template <class F, class D>
Var unary(Var x, F f, D dydx_from_xy) {
    Tape& t = x.tape();
    const Tensor& xv = x.value();
    Tensor y(xv.shape());
    for (std::size_t i = 0; i < xv.size(); ++i) y[i] = f(xv[i]);
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi}, [xi, dydx_from_xy](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& xv = tp.value(xi);
        const Tensor& yv = tp.value(self);
        Tensor& gx = tp.grad(xi);
        accumulate_product(g.data().data(), xv.data().data(), yv.data().data(), gx.data().data(), g.size(),
                           dydx_from_xy);
    });
}

} // namespace detail

enum class Reduce { mean, sum, max };

inline Var matmul(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    detail::require_matrix(av, "matmul");
    detail::require_matrix(bv, "matmul");
    const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    if (bv.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions disagree for " + shape_string(av.shape()) + " x " +
                         shape_string(bv.shape()));
    }
    Tensor out = Tensor::matrix(m, n);
    gemm_acc(av.data(), bv.data(), out.data(), m, k, n);
    const std::size_t ai = a.id(), bi = b.id();
    return a.tape().record(std::move(out), {ai, bi}, [ai, bi, m, k, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ai)) gemm_nt_acc(g.data(), t.value(bi).data(), t.grad(ai).data(), m, n, k);
        if (t.requires_grad(bi)) gemm_tn_acc(t.value(ai).data(), g.data(), t.grad(bi).data(), m, k, n);
    });
}

namespace detail {

// Elementwise binary op; either side may be a 1×1 scalar.
template <class F, class DA, class DB>
Var binary(Var a, Var b, const char* what, F f, DA dfa, DB dfb) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const bool sa = is_scalar(av) && !is_scalar(bv);
    const bool sb = is_scalar(bv) && !is_scalar(av);
    if (!sa && !sb) require_same(av, bv, what);
    Tensor out(sa ? bv.shape() : av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[sa ? 0 : i], bv[sb ? 0 : i]);
    const std::size_t ai = a.id(), bi = b.id();
    return a.tape().record(std::move(out), {ai, bi}, [=](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& av = t.value(ai);
        const Tensor& bv = t.value(bi);
        Tensor* ga = t.requires_grad(ai) ? &t.grad(ai) : nullptr;
        Tensor* gb = t.requires_grad(bi) ? &t.grad(bi) : nullptr;
        if (!sa && !sb) {
            const double *gp = g.data().data(), *ap = av.data().data(), *bp = bv.data().data();
            if (ga) accumulate_product(gp, ap, bp, ga->data().data(), g.size(), dfa);
            if (gb) accumulate_product(gp, ap, bp, gb->data().data(), g.size(), dfb);
            return;
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = av[sa ? 0 : i], y = bv[sb ? 0 : i];
            if (ga) (*ga)[sa ? 0 : i] += g[i] * dfa(x, y);
            if (gb) (*gb)[sb ? 0 : i] += g[i] * dfb(x, y);
        }
    });
}

} // namespace detail

inline Var add(Var a, Var b) {
    return detail::binary(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

inline Var sub(Var a, Var b) {
    return detail::binary(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

inline Var mul(Var a, Var b) {
    return detail::binary(
        a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
        [](double x, double) { return x; });
}

inline Var scale(Var x, double s) {
    return detail::unary(
        x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

inline Var tanh(Var x) {
    return detail::unary(
        x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

inline Var sigmoid(Var x) {
    return detail::unary(
        x,
        [](double v) {
            if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

inline Var relu(Var x) {
    return detail::unary(
        x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

/// x(M×N) + bias(1×N) broadcast over rows.
inline Var add_bias(Var x, Var bias) {
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    detail::require_matrix(xv, "add_bias");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    if (bv.size() != n) {
        throw ShapeError("add_bias: bias " + shape_string(bv.shape()) + " does not match " + shape_string(xv.shape()));
    }
    Tensor out = xv;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) out[r * n + c] += bv[c];
    const std::size_t xi = x.id(), bi = bias.id();
    return x.tape().record(std::move(out), {xi, bi}, [xi, bi, m, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(xi)) t.grad(xi) += g;
        if (t.requires_grad(bi)) {
            Tensor& gb = t.grad(bi);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
        }
    });
}

/// Row-wise softmax with max subtraction.
inline Var softmax(Var x) {
    const Tensor& xv = x.value();
    detail::require_matrix(xv, "softmax");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    if (n == 0) throw ShapeError("softmax: last axis is empty");
    Tensor out(xv.shape());
    for (std::size_t r = 0; r < m; ++r) {
        const double* in = xv.data().data() + r * n;
        double* o = out.data().data() + r * n;
        const double mx = *std::max_element(in, in + n);
        double z = 0.0;
        for (std::size_t c = 0; c < n; ++c) z += (o[c] = std::exp(in[c] - mx));
        for (std::size_t c = 0; c < n; ++c) o[c] /= z;
    }
    const std::size_t xi = x.id();
    return x.tape().record(std::move(out), {xi}, [xi, m, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& gx = t.grad(xi);
        for (std::size_t r = 0; r < m; ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < n; ++c) dot += g[r * n + c] * y[r * n + c];
            for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += y[r * n + c] * (g[r * n + c] - dot);
        }
    });
}

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean over rows of -log(p[row, label[row]]), with p clamped at 1e-12.
inline Var cross_entropy(Var probs, std::span<const std::size_t> labels) {
    const Tensor& pv = probs.value();
    detail::require_matrix(pv, "cross_entropy");
    const std::size_t m = pv.dim(0), n = pv.dim(1);
    if (labels.size() != m) {
        throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(m) +
                         " rows");
    }
    double loss = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        if (labels[r] >= n) {
            throw DataError("cross_entropy: label " + std::to_string(labels[r]) + " outside [0, " +
                            std::to_string(n) + ")");
        }
        loss -= std::log(std::max(pv[r * n + labels[r]], kProbabilityFloor));
    }
    loss /= static_cast<double>(m);
    std::vector<std::size_t> lab(labels.begin(), labels.end());
    const std::size_t pi = probs.id();
    return probs.tape().record(Tensor::scalar(loss), {pi}, [pi, m, n, lab = std::move(lab)](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0];
        const Tensor& pv = t.value(pi);
        Tensor& gp = t.grad(pi);
        for (std::size_t r = 0; r < m; ++r) {
            const double p = pv[r * n + lab[r]];
            if (p > kProbabilityFloor) gp[r * n + lab[r]] -= g / (static_cast<double>(m) * p);
        }
    });
}

/// Inverted dropout: train mode zeroes with probability `rate` and scales
/// survivors by 1/(1-rate); eval mode and rate 0 are the identity.
inline Var dropout(Var x, double rate, Mode mode, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
    if (mode == Mode::eval || rate == 0.0) return x;
    const Tensor& xv = x.value();
    std::vector<double> mask(xv.size());
    const double keep = 1.0 / (1.0 - rate);
    for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep;
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
    const std::size_t xi = x.id();
    return x.tape().record(std::move(out), {xi}, [xi, mask = std::move(mask)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(xi);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
    });
}

inline Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
    const std::size_t m = parts[0].value().dim(0);
    std::size_t n = 0;
    std::vector<std::size_t> ids, widths;
    for (const Var& p : parts) {
        detail::require_matrix(p.value(), "concat_cols");
        if (p.value().dim(0) != m) {
            throw ShapeError("concat_cols: row mismatch " + shape_string(parts[0].value().shape()) + " vs " +
                             shape_string(p.value().shape()));
        }
        ids.push_back(p.id());
        widths.push_back(p.value().dim(1));
        n += widths.back();
    }
    Tensor out = Tensor::matrix(m, n);
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Tensor& v = parts[k].value();
        for (std::size_t r = 0; r < m; ++r)
            std::copy_n(v.data().data() + r * widths[k], widths[k], out.data().data() + r * n + off);
        off += widths[k];
    }
    return parts[0].tape().record(std::move(out), ids, [ids, widths, m, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        std::size_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (t.requires_grad(ids[k])) {
                Tensor& gk = t.grad(ids[k]);
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < widths[k]; ++c) gk[r * widths[k] + c] += g[r * n + off + c];
            }
            off += widths[k];
        }
    });
}

inline Var concat_cols(std::initializer_list<Var> parts) {
    return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

inline Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
    const std::size_t n = parts[0].value().dim(1);
    std::vector<std::size_t> ids, offsets;
    std::vector<double> data;
    std::size_t m = 0;
    for (const Var& p : parts) {
        detail::require_matrix(p.value(), "concat_rows");
        if (p.value().dim(1) != n) {
            throw ShapeError("concat_rows: column mismatch " + shape_string(parts[0].value().shape()) + " vs " +
                             shape_string(p.value().shape()));
        }
        ids.push_back(p.id());
        offsets.push_back(data.size());
        data.insert(data.end(), p.value().data().begin(), p.value().data().end());
        m += p.value().dim(0);
    }
    return parts[0].tape().record(Tensor({m, n}, std::move(data)), ids, [ids, offsets](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (!t.requires_grad(ids[k])) continue;
            Tensor& gk = t.grad(ids[k]);
            for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += g[offsets[k] + i];
        }
    });
}

inline Var slice_cols(Var x, std::size_t start, std::size_t count) {
    const Tensor& xv = x.value();
    detail::require_matrix(xv, "slice_cols");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    if (start + count > n) throw ShapeError("slice_cols: range exceeds " + shape_string(xv.shape()));
    Tensor out = Tensor::matrix(m, count);
    for (std::size_t r = 0; r < m; ++r)
        std::copy_n(xv.data().data() + r * n + start, count, out.data().data() + r * count);
    const std::size_t xi = x.id();
    return x.tape().record(std::move(out), {xi}, [xi, m, n, start, count](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(xi);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < count; ++c) gx[r * n + start + c] += g[r * count + c];
    });
}

inline Var slice_rows(Var x, std::size_t start, std::size_t count) {
    const Tensor& xv = x.value();
    detail::require_matrix(xv, "slice_rows");
    const std::size_t n = xv.dim(1);
    if (start + count > xv.dim(0)) throw ShapeError("slice_rows: range exceeds " + shape_string(xv.shape()));
    std::vector<double> data(xv.data().begin() + static_cast<std::ptrdiff_t>(start * n),
                             xv.data().begin() + static_cast<std::ptrdiff_t>((start + count) * n));
    const std::size_t xi = x.id();
    return x.tape().record(Tensor({count, n}, std::move(data)), {xi}, [xi, start, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(xi);
        for (std::size_t i = 0; i < g.size(); ++i) gx[start * n + i] += g[i];
    });
}

/// out[r] = x[index[r]]; gradients scatter-add back.
inline Var gather_rows(Var x, std::span<const std::size_t> index) {
    const Tensor& xv = x.value();
    detail::require_matrix(xv, "gather_rows");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    Tensor out = Tensor::matrix(index.size(), n);
    for (std::size_t r = 0; r < index.size(); ++r) {
        if (index[r] >= m) throw ShapeError("gather_rows: row " + std::to_string(index[r]) + " out of range");
        std::copy_n(xv.data().data() + index[r] * n, n, out.data().data() + r * n);
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    const std::size_t xi = x.id();
    return x.tape().record(std::move(out), {xi}, [xi, n, idx = std::move(idx)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(xi);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < n; ++c) gx[idx[r] * n + c] += g[r * n + c];
    });
}

inline Var reshape(Var x, std::size_t rows, std::size_t cols) {
    const Tensor& xv = x.value();
    if (rows * cols != xv.size()) {
        throw ShapeError("reshape: cannot view " + shape_string(xv.shape()) + " as [" + std::to_string(rows) + "x" +
                         std::to_string(cols) + "]");
    }
    std::vector<double> data(xv.data().begin(), xv.data().end());
    const std::size_t xi = x.id();
    return x.tape().record(Tensor({rows, cols}, std::move(data)), {xi}, [xi](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(xi);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
}

/// Reduce consecutive groups of `group` rows to one row each, in fixed
/// row order. Max routes the gradient to the first maximal row.
inline Var segment_reduce(Var x, std::size_t group, Reduce kind) {
    const Tensor& xv = x.value();
    detail::require_matrix(xv, "segment_reduce");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    if (group == 0 || m % group != 0) {
        throw ShapeError("segment_reduce: " + std::to_string(m) + " rows not divisible into groups of " +
                         std::to_string(group));
    }
    const std::size_t segments = m / group;
    Tensor out = Tensor::matrix(segments, n);
    std::vector<std::size_t> argmax;
    if (kind == Reduce::max) argmax.assign(segments * n, 0);
    for (std::size_t s = 0; s < segments; ++s) {
        double* o = out.data().data() + s * n;
        for (std::size_t c = 0; c < n; ++c) {
            if (kind == Reduce::max) {
                std::size_t best = s * group;
                for (std::size_t r = s * group + 1; r < (s + 1) * group; ++r)
                    if (xv[r * n + c] > xv[best * n + c]) best = r;
                o[c] = xv[best * n + c];
                argmax[s * n + c] = best;
            } else {
                double acc = 0.0;
                for (std::size_t r = s * group; r < (s + 1) * group; ++r) acc += xv[r * n + c];
                o[c] = kind == Reduce::mean ? acc / static_cast<double>(group) : acc;
            }
        }
    }
    const std::size_t xi = x.id();
    return x.tape().record(
        std::move(out), {xi}, [xi, n, group, segments, kind, argmax = std::move(argmax)](Tape& t, std::size_t self) {
            const Tensor& g = t.grad(self);
            Tensor& gx = t.grad(xi);
            const double w = kind == Reduce::mean ? 1.0 / static_cast<double>(group) : 1.0;
            for (std::size_t s = 0; s < segments; ++s)
                for (std::size_t c = 0; c < n; ++c) {
                    if (kind == Reduce::max) {
                        gx[argmax[s * n + c] * n + c] += g[s * n + c];
                    } else {
                        for (std::size_t r = s * group; r < (s + 1) * group; ++r) gx[r * n + c] += w * g[s * n + c];
                    }
                }
        });
}

/// Multiply row r by the constant weight[r].
inline Var scale_rows(Var x, std::span<const double> weight) {
    const Tensor& xv = x.value();
    detail::require_matrix(xv, "scale_rows");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    if (weight.size() != m) throw ShapeError("scale_rows: weight count does not match row count");
    Tensor out = xv;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) out[r * n + c] *= weight[r];
    std::vector<double> w(weight.begin(), weight.end());
    const std::size_t xi = x.id();
    return x.tape().record(std::move(out), {xi}, [xi, n, w = std::move(w)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(xi);
        for (std::size_t r = 0; r < w.size(); ++r)
            for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += w[r] * g[r * n + c];
    });
}

/// Σ_k weight[k] · parts[k] over equally shaped operands.
inline Var weighted_sum(std::span<const Var> parts, std::span<const double> weight) {
    if (parts.empty() || parts.size() != weight.size()) throw ShapeError("weighted_sum: operand/weight count mismatch");
    Tensor out(parts[0].value().shape());
    std::vector<std::size_t> ids;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        detail::require_same(parts[0].value(), parts[k].value(), "weighted_sum");
        const Tensor& v = parts[k].value();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight[k] * v[i];
        ids.push_back(parts[k].id());
    }
    std::vector<double> w(weight.begin(), weight.end());
    return parts[0].tape().record(std::move(out), ids, [ids, w = std::move(w)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (!t.requires_grad(ids[k])) continue;
            Tensor& gk = t.grad(ids[k]);
            for (std::size_t i = 0; i < g.size(); ++i) gk[i] += w[k] * g[i];
        }
    });
}

inline Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().data()) s += v;
    const std::size_t xi = x.id();
    return x.tape().record(Tensor::scalar(s), {xi}, [xi](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0];
        for (double& v : t.grad(xi).data()) v += g;
    });
}

inline Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

} // namespace arnlstm::op
