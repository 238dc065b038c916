// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "arnlstm/arnlstm.hpp"

using namespace arnlstm;

namespace {

using Vec = std::vector<double>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Collects the first few violations of a criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    }
    void note(const std::string& s) { info_ += (info_.empty() ? "" : "; ") + s; }
    bool ok() const { return failures_ == 0; }
    std::string detail() const {
        if (ok()) return info_;
        return std::to_string(failures_) + " violation(s): " + notes_;
    }

private:
    std::size_t failures_ = 0;
    std::string notes_, info_;
};

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor t = Tensor::matrix(rows, cols);
    for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
    return t;
}

std::string num(double v, int digits = 3) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

// ---- relational oracle: plain nested loops over joint pairs ----

Vec dense(const Vec& x, const Tensor& W, const Tensor& b, Activation act) {
    Vec y(W.cols(), 0.0);
    for (std::size_t c = 0; c < W.cols(); ++c) {
        double s = b[c];
        for (std::size_t r = 0; r < W.rows(); ++r) s += x[r] * W.at(r, c);
        switch (act) {
        case Activation::relu: s = std::max(s, 0.0); break;
        case Activation::tanh: s = std::tanh(s); break;
        case Activation::sigmoid: s = 1.0 / (1.0 + std::exp(-s)); break;
        case Activation::identity: break;
        }
        y[c] = s;
    }
    return y;
}

Vec joint_vec(const Tensor& frame, std::size_t person, std::size_t joint, std::size_t J) {
    Vec v(frame.cols());
    for (std::size_t d = 0; d < frame.cols(); ++d) v[d] = frame.at(person * J + joint, d);
    return v;
}

Vec g_theta(const PairEncoder& enc, const Vec& a, const Vec& b) {
    Vec h(a);
    h.insert(h.end(), b.begin(), b.end());
    for (const auto& l : enc.layers()) h = dense(h, l.weight().value, l.bias().value, l.activation());
    return h;
}

Vec reduce_items(const std::vector<Vec>& items, PairReduce r) {
    Vec out(items[0].size(), 0.0);
    for (const auto& v : items)
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    if (r == PairReduce::mean)
        for (double& x : out) x /= static_cast<double>(items.size());
    return out;
}

Vec pool_two(const Vec& a, const Vec& b, PoolKind kind) {
    Vec out;
    switch (kind) {
    case PoolKind::average:
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back((a[i] + b[i]) / 2.0);
        break;
    case PoolKind::sum:
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] + b[i]);
        break;
    case PoolKind::max:
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(std::max(a[i], b[i]));
        break;
    case PoolKind::concatenate:
        out = a;
        out.insert(out.end(), b.begin(), b.end());
        break;
    }
    return out;
}

Vec brute_inward(const Tensor& frame, const PairEncoder& enc, std::size_t J, const RelationOptions& opt,
                 std::size_t& pairs) {
    std::vector<Vec> d0, d1;
    for (std::size_t i = 0; i < J; ++i)
        for (std::size_t k = 0; k < J; ++k) {
            d0.push_back(g_theta(enc, joint_vec(frame, 0, i, J), joint_vec(frame, 1, k, J)));
            d1.push_back(g_theta(enc, joint_vec(frame, 1, i, J), joint_vec(frame, 0, k, J)));
        }
    pairs = d0.size() + d1.size();
    return pool_two(reduce_items(d0, opt.reduce), reduce_items(d1, opt.reduce), opt.pool);
}

Vec brute_outward(const Tensor& frame, const PairEncoder& enc, std::size_t J, const RelationOptions& opt) {
    Vec out;
    for (std::size_t p = 0; p < 2; ++p) {
        std::vector<Vec> items;
        for (std::size_t i = 0; i < J; ++i)
            for (std::size_t k = i + 1; k < J; ++k)
                items.push_back(g_theta(enc, joint_vec(frame, p, i, J), joint_vec(frame, p, k, J)));
        const Vec r = reduce_items(items, opt.reduce);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

struct RelationFixture {
    ParamStore store;
    PairEncoder enc;
    RelationHead head;
};

std::unique_ptr<RelationFixture> relation_fixture(std::size_t F, std::size_t E, std::size_t layers,
                                                  std::size_t head_in, Rng& rng) {
    auto fx = std::make_unique<RelationFixture>();
    EncoderConfig cfg;
    cfg.widths.assign(layers, E);
    fx->enc = PairEncoder(fx->store, "g", F, cfg, rng);
    for (auto& l : fx->enc.layers())
        for (double& b : l.bias().value.data()) b = rng.uniform(-0.5, 0.5);
    fx->head = RelationHead(fx->store, "f", head_in, 5, Activation::tanh, {}, rng);
    for (double& b : fx->head.bias().value.data()) b = rng.uniform(-0.5, 0.5);
    return fx;
}

Tensor swap_persons(const Tensor& frames, std::size_t J) {
    Tensor out = frames;
    const std::size_t n = frames.rows() / (2 * J);
    for (std::size_t f = 0; f < n; ++f)
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t d = 0; d < frames.cols(); ++d) {
                out.at((f * 2) * J + j, d) = frames.at((f * 2 + 1) * J + j, d);
                out.at((f * 2 + 1) * J + j, d) = frames.at((f * 2) * J + j, d);
            }
    return out;
}

// ---- criteria ----

Check gradient_suite() {
    Check c;
    GradientSuiteConfig cfg;
    cfg.trials = 20;
    const auto t0 = Clock::now();
    const auto groups = run_gradient_suite(cfg);
    const double secs = seconds_since(t0);
    double worst = 0;
    for (const char* family : {"affine", "activations", "softmax_ce", "lstm", "pooling", "relation", "td_lstm", "fusion"}) {
        const auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.group == family; });
        c.expect(it != groups.end(), std::string("missing family ") + family);
    }
    for (const auto& g : groups) {
        c.expect(g.trials >= 20, g.group + " ran " + std::to_string(g.trials) + " configurations");
        c.expect(g.kinks == 0, g.group + " skipped " + std::to_string(g.kinks) + " kink coordinates");
        c.expect(g.worst_rel_error <= 1e-4, g.group + " rel error " + num(g.worst_rel_error) + " at " + g.worst_path);
        worst = std::max(worst, g.worst_rel_error);
    }
    c.expect(secs < 60.0, "runtime " + num(secs) + " s");
    c.note(std::to_string(groups.size()) + " families x 20 configs, worst " + num(worst) + ", " + num(secs) + " s");
    return c;
}

Check relation_oracle() {
    Check c;
    Rng rng(77);
    double worst = 0;
    for (std::size_t J = 2; J <= 4; ++J) {
        c.expect(enumerate_inward_pairs(J).size() == 2 * J * J, "inward pair count J=" + std::to_string(J));
        c.expect(enumerate_outward_pairs(J).size() == J * (J - 1) / 2, "outward pair count J=" + std::to_string(J));
        for (std::size_t layers = 1; layers <= 2; ++layers)
            for (PoolKind pk : {PoolKind::average, PoolKind::sum, PoolKind::max, PoolKind::concatenate})
                for (PairReduce pr : {PairReduce::mean, PairReduce::sum}) {
                    const std::size_t F = 3, E = 4, frames = 2;
                    const RelationOptions opt{pk, pr};
                    const std::size_t in_w = pooled_width(E, 2, pk);
                    auto fx_in = relation_fixture(F, E, layers, in_w, rng);
                    auto fx_out = relation_fixture(F, E, layers, 2 * E, rng);
                    auto fx_fused = relation_fixture(F, E, layers, in_w + 2 * E, rng);
                    const Tensor x = random_matrix(frames * 2 * J, F, rng);
                    Tape t;
                    const Var in = arn_inward(t.constant(x), fx_in->enc, fx_in->head, J, opt);
                    const Var out = arn_outward(t.constant(x), fx_out->enc, fx_out->head, J, opt);
                    const Var fused = arn_fused(t.constant(x), fx_fused->enc, fx_fused->head, J, opt);
                    auto head = [](const RelationFixture& fx, const Vec& v) {
                        return dense(v, fx.head.weight().value, fx.head.bias().value, fx.head.activation());
                    };
                    for (std::size_t f = 0; f < frames; ++f) {
                        Tensor frame = Tensor::matrix(2 * J, F);
                        for (std::size_t r = 0; r < 2 * J; ++r)
                            for (std::size_t d = 0; d < F; ++d) frame.at(r, d) = x.at(f * 2 * J + r, d);
                        std::size_t pairs = 0;
                        const Vec ei = head(*fx_in, brute_inward(frame, fx_in->enc, J, opt, pairs));
                        c.expect(pairs == 2 * J * J, "oracle visited " + std::to_string(pairs) + " inward pairs");
                        const Vec eo = head(*fx_out, brute_outward(frame, fx_out->enc, J, opt));
                        Vec cat = brute_inward(frame, fx_fused->enc, J, opt, pairs);
                        const Vec o2 = brute_outward(frame, fx_fused->enc, J, opt);
                        cat.insert(cat.end(), o2.begin(), o2.end());
                        const Vec ef = head(*fx_fused, cat);
                        for (std::size_t k = 0; k < 5; ++k) {
                            const double e = std::max({std::abs(in.value().at(f, k) - ei[k]),
                                                       std::abs(out.value().at(f, k) - eo[k]),
                                                       std::abs(fused.value().at(f, k) - ef[k])});
                            worst = std::max(worst, e);
                            c.expect(e <= 1e-12, "J=" + std::to_string(J) + " pool " + to_string(pk) + " diff " + num(e));
                        }
                    }
                }
    }
    c.note("J 2..4, 4 pools x 2 reductions x 2 depths, max abs diff " + num(worst));
    return c;
}

Check symmetry() {
    Check c;
    Rng rng(6);
    for (std::size_t layers : {1u, 2u})
        for (PoolKind pk : {PoolKind::average, PoolKind::sum, PoolKind::max}) {
            auto fx = relation_fixture(3, 5, layers, 5, rng);
            const std::size_t J = 4;
            const Tensor x = random_matrix(3 * 2 * J, 3, rng);
            Tape t;
            const Var a = arn_inward(t.constant(x), fx->enc, fx->head, J, {pk});
            const Var b = arn_inward(t.constant(swap_persons(x, J)), fx->enc, fx->head, J, {pk});
            c.expect(a.value() == b.value(), "inward swap not bit-identical under " + to_string(pk));
        }
    {
        auto fx = relation_fixture(3, 5, 2, 10, rng);
        const std::size_t J = 3, E = 5;
        const Tensor x = random_matrix(2 * 2 * J, 3, rng);
        Tape t;
        const Var a = outward_aggregate(t.constant(x), fx->enc, J);
        const Var b = outward_aggregate(t.constant(swap_persons(x, J)), fx->enc, J);
        for (std::size_t f = 0; f < 2; ++f)
            for (std::size_t k = 0; k < E; ++k) {
                c.expect(a.value().at(f, k) == b.value().at(f, k + E), "outward swap: first half");
                c.expect(a.value().at(f, k + E) == b.value().at(f, k), "outward swap: second half");
            }
    }
    // Pair order inside each direction block, and the order of the two blocks.
    {
        auto fx = relation_fixture(3, 4, 2, 4, rng);
        const std::size_t J = 4;
        const Tensor x = random_matrix(2 * J, 3, rng);
        std::vector<std::size_t> first, second;
        for (const auto& p : enumerate_inward_pairs(J)) {
            first.push_back(p.from_person * J + p.first);
            second.push_back(p.to_person * J + p.second);
        }
        const std::size_t half = first.size() / 2;
        std::vector<std::size_t> perm(half);
        std::iota(perm.begin(), perm.end(), 0);
        double worst = 0;
        for (int trial = 0; trial < 10; ++trial) {
            rng.shuffle(std::span<std::size_t>(perm));
            std::vector<std::size_t> f2, s2, fs, ss;
            for (std::size_t dir = 0; dir < 2; ++dir)
                for (auto i : perm) {
                    f2.push_back(first[dir * half + i]);
                    s2.push_back(second[dir * half + i]);
                }
            fs.assign(f2.begin() + static_cast<long>(half), f2.end());
            fs.insert(fs.end(), f2.begin(), f2.begin() + static_cast<long>(half));
            ss.assign(s2.begin() + static_cast<long>(half), s2.end());
            ss.insert(ss.end(), s2.begin(), s2.begin() + static_cast<long>(half));
            for (PoolKind pk : {PoolKind::average, PoolKind::sum, PoolKind::max}) {
                Tape t;
                const Var base = pool_rows(fx->enc.encode_reduce(t.constant(x), first, second, J * J, PairReduce::mean), 2, pk);
                const Var shuf = pool_rows(fx->enc.encode_reduce(t.constant(x), f2, s2, J * J, PairReduce::mean), 2, pk);
                const Var flip = pool_rows(fx->enc.encode_reduce(t.constant(x), fs, ss, J * J, PairReduce::mean), 2, pk);
                for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(base.value()[k] - shuf.value()[k]));
                c.expect(flip.value() == shuf.value(), "direction-block swap changed " + to_string(pk) + " output");
            }
        }
        // Shuffling changes only the summation order.
        c.expect(worst <= 1e-14, "pair shuffle moved output by " + num(worst));
        c.note("pair-shuffle max diff " + num(worst));
    }
    return c;
}

double sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Check lstm_oracle() {
    Check c;
    Rng rng(3);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        ParamStore store;
        LstmCell cell(store, "lstm", 1, 2, InitConfig{}, true, rng);
        for (double& v : cell.b().value.data()) v = rng.uniform(-1, 1);
        const double x = rng.uniform(-1, 1);
        const double h0[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)}, c0[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Tape t;
        const LstmState s0{t.constant(Tensor::from_rows({{h0[0], h0[1]}})), t.constant(Tensor::from_rows({{c0[0], c0[1]}}))};
        const LstmState s1 = lstm_step(cell, t.constant(Tensor::scalar(x)), s0);
        const Tensor& W = cell.W().value;
        const Tensor& U = cell.U().value;
        const Tensor& b = cell.b().value;
        // Gate columns are ordered [i | f | g | o].
        auto pre = [&](std::size_t col) { return x * W.at(0, col) + h0[0] * U.at(0, col) + h0[1] * U.at(1, col) + b[col]; };
        for (std::size_t k = 0; k < 2; ++k) {
            const double i = sigm(pre(k)), f = sigm(pre(2 + k)), g = std::tanh(pre(4 + k)), o = sigm(pre(6 + k));
            const double cn = f * c0[k] + i * g;
            const double e = std::max(std::abs(s1.c.value()[k] - cn), std::abs(s1.h.value()[k] - o * std::tanh(cn)));
            worst = std::max(worst, e);
            c.expect(e <= 1e-14, "step diff " + num(e));
        }
    }
    ParamStore store;
    LstmCell cell(store, "lstm", 2, 3, InitConfig{}, true, rng);
    const std::size_t T = 8;
    const Tensor base = random_matrix(T, 2, rng);
    Rng drop(0);
    for (std::size_t changed = 0; changed < T; ++changed) {
        Tensor alt = base;
        alt.at(changed, 0) += 3.0;
        Tape t;
        const auto a = lstm_forward_stacked(cell, t.constant(base), T, 0.0, Mode::eval, drop);
        const auto b = lstm_forward_stacked(cell, t.constant(alt), T, 0.0, Mode::eval, drop);
        for (std::size_t s = 0; s < changed; ++s)
            c.expect(a[s].value() == b[s].value(), "frame " + std::to_string(changed) + " leaked into step " + std::to_string(s));
        c.expect(a[changed].value() != b[changed].value(), "perturbed frame had no effect");
    }
    c.note("H=2 I=1 max diff " + num(worst) + ", causality over " + std::to_string(T) + " frames");
    return c;
}

Check metric_oracle() {
    Check c;
    const auto m = metrics_from_counts(50, 40, 5, 5);
    // 90/100, 50/55, 50/55, and their harmonic mean.
    c.expect(*m.accuracy == 0.9, "accuracy " + num(*m.accuracy, 17));
    c.expect(*m.precision == 0.9090909090909091, "precision " + num(*m.precision, 17));
    c.expect(*m.recall == 0.9090909090909091, "recall " + num(*m.recall, 17));
    c.expect(std::abs(*m.f_score - 0.9090909090909091) <= 1e-16, "f-score " + num(*m.f_score, 17));
    const auto perfect = metrics_from_counts(3, 7, 0, 0);
    c.expect(*perfect.accuracy == 1.0 && *perfect.precision == 1.0 && *perfect.recall == 1.0 && *perfect.f_score == 1.0,
             "perfect classifier");
    c.expect(!metrics_from_counts(0, 7, 0, 3).precision.has_value(), "tp+fp=0 must be undefined");
    c.expect(!metrics_from_counts(0, 4, 2, 0).recall.has_value(), "tp+fn=0 must be undefined");
    c.expect(!metrics_from_counts(0, 1, 1, 1).f_score.has_value(), "P+R=0 must be undefined");
    c.expect(!metrics_from_counts(0, 0, 0, 0).accuracy.has_value(), "empty counts must be undefined");
    c.expect(report::metric_json(std::nullopt) == "undefined", "undefined marker in reports");

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t C = 2 + rng.below(6), n = 1 + rng.below(200);
        const Tensor probs = random_matrix(n, C, rng);
        std::vector<std::size_t> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back(rng.below(C));
        const EvalReport r = evaluate_probabilities(probs, labels);
        c.expect(r.confusion.total() == n && r.samples == n, "confusion total differs from sample count");
        for (std::size_t k = 0; k < C; ++k) {
            const auto& cm = r.confusion;
            c.expect(cm.tp(k) + cm.tn(k) + cm.fp(k) + cm.fn(k) == n, "one-vs-rest counts do not sum to n");
        }
    }
    return c;
}

Check gaussian_suite() {
    Check c;
    double worst = 0;
    for (std::size_t T : {1u, 2u, 3u, 10u, 99u, 1000u, 10000u})
        for (double sigma : {0.1, 1.0, default_sigma(T), 100.0}) {
            const auto w = gaussian_weights(T, sigma).weights;
            const double sum = std::accumulate(w.begin(), w.end(), 0.0);
            worst = std::max(worst, std::abs(sum - 1.0));
            c.expect(std::abs(sum - 1.0) <= 1e-12, "T=" + std::to_string(T) + " sum " + num(sum, 17));
            bool symmetric = true, monotone = true;
            for (std::size_t t = 0; t < T; ++t) symmetric = symmetric && w[t] == w[T - 1 - t];
            for (std::size_t t = 0; t + 1 < (T + 1) / 2; ++t) {
                monotone = monotone && w[t] <= w[t + 1];
                if (w[t] >= std::numeric_limits<double>::min()) monotone = monotone && w[t] < w[t + 1];
            }
            c.expect(symmetric, "asymmetric at T=" + std::to_string(T) + " sigma " + num(sigma));
            c.expect(monotone, "not center-peaked at T=" + std::to_string(T) + " sigma " + num(sigma));
        }
    c.note("T up to 10000, max |sum-1| " + num(worst));
    return c;
}

struct RunArtifacts {
    std::string checkpoint, history, report;
};

RunArtifacts small_run(std::uint64_t seed) {
    SyntheticConfig sc;
    sc.classes = SyntheticConfig::first_families(3);
    sc.per_class = 6;
    sc.frames = 8;
    sc.joints = 4;
    sc.seed = seed;
    const auto seqs = generate_synthetic(sc);
    ModelConfig mc;
    mc.classes = 3;
    mc.joints = 4;
    mc.seq_len = 8;
    mc.encoder_widths = {6};
    mc.head_width = 6;
    mc.lstm_hidden = 6;
    mc.lstm_depth = 2;
    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 4;
    tc.max_epochs = 5;
    tc.seed = derive_seed(seed, "train");
    auto model = make_model(mc, derive_seed(seed, "model"));
    const auto data = model->prepare_all(seqs, BoneTopology::spine_and_arm(4));
    std::vector<std::size_t> train_idx(12), val_idx(6);
    std::iota(train_idx.begin(), train_idx.end(), 0);
    std::iota(val_idx.begin(), val_idx.end(), 12);
    RunArtifacts a;
    a.history = report::history_csv(train(*model, data, train_idx, val_idx, tc));
    a.checkpoint = checkpoint::encode(model->params().snapshot());
    a.report = report::eval_json(evaluate(*model, data, val_idx)).dump(2);
    return a;
}

Check determinism() {
    Check c;
    for (std::uint64_t seed : {1u, 2u}) {
        const RunArtifacts a = small_run(seed), b = small_run(seed);
        c.expect(a.checkpoint == b.checkpoint, "checkpoint bytes differ for seed " + std::to_string(seed));
        c.expect(a.history == b.history, "history differs for seed " + std::to_string(seed));
        c.expect(a.report == b.report, "report differs for seed " + std::to_string(seed));
    }
    c.expect(small_run(1).checkpoint != small_run(2).checkpoint, "different seeds gave identical checkpoints");
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::size_t cells_in(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

Check format_round_trips() {
    Check c;
    const auto dir = std::filesystem::temp_directory_path() / "arnlstm_acceptance";
    std::filesystem::create_directories(dir);

    SyntheticConfig sc;
    sc.classes = SyntheticConfig::first_families(6);
    sc.per_class = 3;
    sc.seed = 9;
    const auto seqs = generate_synthetic(sc);
    write_csv((dir / "a.csv").string(), seqs);
    write_csv((dir / "b.csv").string(), load_csv((dir / "a.csv").string()));
    c.expect(slurp(dir / "a.csv") == slurp(dir / "b.csv"), "dataset CSV write-read-write differs");

    ModelConfig mc;
    mc.classes = 6;
    mc.joints = 8;
    mc.seq_len = 20;
    mc.encoder_widths = {8};
    mc.head_width = 8;
    mc.lstm_hidden = 8;
    auto model = make_model(mc, 4);
    checkpoint::save(model->params(), (dir / "a.bin").string());
    const std::string again = checkpoint::encode(checkpoint::read((dir / "a.bin").string()));
    c.expect(again == slurp(dir / "a.bin"), "checkpoint write-read-write differs");

    // Fold table: fold, accuracy, loss per fold. Per-class table: action, accuracy, most similar action.
    CrossValidationResult cv;
    Rng rng(2);
    for (std::size_t f = 0; f < 5; ++f) {
        ConfusionMatrix cm(6);
        for (int i = 0; i < 30; ++i) cm.add(rng.below(6), rng.below(6));
        cv.folds.push_back({f, {}, report_from_confusion(cm, 1.5)});
        cv.mean_accuracy += cv.folds.back().test.accuracy / 5;
    }
    const auto table = lines_of(report::fold_table_csv(cv));
    c.expect(table.size() == 6 && table[0] == "fold,acc_percent,loss", "fold table header or row count");
    for (std::size_t f = 1; f < table.size(); ++f) {
        c.expect(cells_in(table[f]) == 3, "fold row has " + std::to_string(cells_in(table[f])) + " cells");
        c.expect(table[f].rfind(std::to_string(f) + ",", 0) == 0, "fold rows are numbered from 1");
    }
    const auto per_class = lines_of(report::per_class_csv(cv.folds[0].test));
    c.expect(per_class.size() == 7 && per_class[0] == "class,acc_percent,similar_class", "per-class header or row count");
    for (std::size_t k = 1; k < per_class.size(); ++k) c.expect(cells_in(per_class[k]) == 3, "per-class row width");
    std::filesystem::remove_all(dir);
    return c;
}

Check desk_scale() {
    Check c;
    const auto t0 = Clock::now();
    const auto topo = BoneTopology::spine_and_arm(8);
    std::ostringstream summary;
    summary << std::fixed << std::setprecision(1);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SyntheticConfig sc;
        sc.classes = SyntheticConfig::first_families(6);
        sc.per_class = 40;
        sc.frames = 20;
        sc.joints = 8;
        sc.noise = 0.02;
        sc.seed = seed;
        const auto data = generate_synthetic(sc);
        const auto split = stratified_folds(data, 5, derive_seed(seed, "folds"));
        std::map<StreamKind, double> acc;
        for (StreamKind stream : {StreamKind::fused, StreamKind::joint, StreamKind::temporal}) {
            ModelConfig mc;
            mc.stream = stream;
            mc.classes = 6;
            mc.joints = 8;
            mc.seq_len = 20;
            mc.encoder_widths = {32};
            mc.head_width = 32;
            mc.lstm_hidden = 32;
            mc.lstm_depth = 2;
            TrainConfig tc;
            tc.max_epochs = 100;
            tc.patience = 40;
            tc.seed = derive_seed(seed, "train");
            const auto cv = cross_validate(
                [&](std::size_t f) { return make_model(mc, derive_seed(seed, "model/" + std::to_string(f))); }, data,
                topo, split, tc);
            acc[stream] = cv.mean_accuracy;
        }
        const double fused = acc[StreamKind::fused];
        c.expect(fused >= 0.95, "seed " + std::to_string(seed) + " fused " + num(100 * fused) + "% < 95%");
        for (StreamKind other : {StreamKind::joint, StreamKind::temporal})
            c.expect(fused >= acc[other] - 0.01, "seed " + std::to_string(seed) + " fused below " + to_string(other));
        summary << (seed > 1 ? ", " : "") << "seed " << seed << " fused/joint/temporal " << 100 * fused << "/"
                << 100 * acc[StreamKind::joint] << "/" << 100 * acc[StreamKind::temporal] << "%";
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 600.0, "runtime " + num(secs) + " s");
    summary << ", " << std::setprecision(0) << secs << " s";
    c.note(summary.str());
    return c;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
        {"gradient-suite", gradient_suite},
        {"relation-oracle", relation_oracle},
        {"symmetry", symmetry},
        {"lstm-oracle", lstm_oracle},
        {"metric-oracle", metric_oracle},
        {"gaussian-weights", gaussian_suite},
        {"determinism", determinism},
        {"format-round-trips", format_round_trips},
        {"desk-scale-experiment", desk_scale},
    };
    bool all = true;
    for (const auto& [name, run] : criteria) {
        Check result;
        try {
            result = run();
        } catch (const std::exception& e) {
            result.expect(false, std::string("threw: ") + e.what());
        }
        all = all && result.ok();
        std::cout << (result.ok() ? "PASS " : "FAIL ") << name;
        if (!result.detail().empty()) std::cout << "  (" << result.detail() << ")";
        std::cout << std::endl;
    }
    return all ? 0 : 1;
}
