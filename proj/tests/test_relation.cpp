#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "arnlstm/relation/relation.hpp"
#include "test_util.hpp"

using namespace arnlstm;
using arnlstm::testing::random_matrix;

namespace {

using Vec = std::vector<double>;

// Independent dense layer on plain vectors: act(x·W + b).
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

Vec joint_row(const Tensor& frame, std::size_t person, std::size_t joint, std::size_t J) {
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

Vec reduce(const std::vector<Vec>& items, PairReduce r) {
    Vec out(items[0].size(), 0.0);
    for (const auto& v : items)
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    if (r == PairReduce::mean)
        for (double& x : out) x /= static_cast<double>(items.size());
    return out;
}

Vec brute_inward(const Tensor& frame, const PairEncoder& enc, std::size_t J, const RelationOptions& opt) {
    std::vector<Vec> d0, d1;
    for (std::size_t i = 0; i < J; ++i)
        for (std::size_t k = 0; k < J; ++k) {
            d0.push_back(g_theta(enc, joint_row(frame, 0, i, J), joint_row(frame, 1, k, J)));
            d1.push_back(g_theta(enc, joint_row(frame, 1, i, J), joint_row(frame, 0, k, J)));
        }
    return pool({reduce(d0, opt.reduce), reduce(d1, opt.reduce)}, opt.pool);
}

Vec brute_outward(const Tensor& frame, const PairEncoder& enc, std::size_t J, const RelationOptions& opt) {
    Vec out;
    for (std::size_t p = 0; p < 2; ++p) {
        std::vector<Vec> items;
        for (std::size_t i = 0; i < J; ++i)
            for (std::size_t k = i + 1; k < J; ++k) items.push_back(g_theta(enc, joint_row(frame, p, i, J), joint_row(frame, p, k, J)));
        Vec r = reduce(items, opt.reduce);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
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

struct Fixture {
    ParamStore store;
    PairEncoder enc;
    RelationHead head;
};

std::unique_ptr<Fixture> make_fixture(std::size_t F, std::size_t E, std::size_t layers, std::size_t head_in, Rng& rng,
                                      Activation act = Activation::relu) {
    auto fx = std::make_unique<Fixture>();
    EncoderConfig cfg;
    cfg.widths.assign(layers, E);
    cfg.activation = act;
    fx->enc = PairEncoder(fx->store, "g", F, cfg, rng);
    // Random biases so zero-input checks are not trivially satisfied elsewhere.
    for (auto& l : fx->enc.layers())
        for (double& b : l.bias().value.data()) b = rng.uniform(-0.5, 0.5);
    fx->head = RelationHead(fx->store, "f", head_in, 5, Activation::tanh, {}, rng);
    for (double& b : fx->head.bias().value.data()) b = rng.uniform(-0.5, 0.5);
    return fx;
}

} // namespace

TEST(Pairs, InwardCountsAndOrder) {
    auto one = enumerate_inward_pairs(1);
    ASSERT_EQ(one.size(), 2u);
    EXPECT_EQ(one[0].first, 0u);
    EXPECT_EQ(one[0].from_person, 0u);
    EXPECT_EQ(one[1].from_person, 1u);
    EXPECT_EQ(enumerate_inward_pairs(3).size(), 18u);
    auto big = enumerate_inward_pairs(25);
    EXPECT_EQ(big.size(), 2u * 625u);
    EXPECT_EQ(std::count_if(big.begin(), big.end(), [](const JointPair& p) { return p.from_person == 0; }), 625);
    auto three = enumerate_inward_pairs(3);
    for (std::size_t r = 1; r < 9; ++r)
        EXPECT_LT(std::make_pair(three[r - 1].first, three[r - 1].second), std::make_pair(three[r].first, three[r].second));
}

TEST(Pairs, OutwardCountsAndOrder) {
    auto two = enumerate_outward_pairs(2);
    ASSERT_EQ(two.size(), 1u);
    EXPECT_EQ(two[0].first, 0u);
    EXPECT_EQ(two[0].second, 1u);
    auto three = enumerate_outward_pairs(3);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_EQ(std::make_pair(three[1].first, three[1].second), std::make_pair(std::size_t{0}, std::size_t{2}));
    EXPECT_EQ(std::make_pair(three[2].first, three[2].second), std::make_pair(std::size_t{1}, std::size_t{2}));
    EXPECT_EQ(enumerate_outward_pairs(25).size(), 300u);
    EXPECT_THROW(enumerate_outward_pairs(1), ConfigError);
}

TEST(Pool, Examples) {
    EXPECT_EQ(pool({{1.5, -2}}, PoolKind::average), (std::vector<double>{1.5, -2}));
    EXPECT_EQ(pool({{1, 5}, {3, 2}}, PoolKind::max), (std::vector<double>{3, 5}));
    EXPECT_EQ(pool({{1, 5}, {3, 2}}, PoolKind::concatenate), (std::vector<double>{1, 5, 3, 2}));
    auto s = pool({{1, 5}, {3, 2}, {0.5, 0.25}}, PoolKind::sum);
    auto a = pool({{1, 5}, {3, 2}, {0.5, 0.25}}, PoolKind::average);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(s[i], 3 * a[i], 1e-15);
    EXPECT_THROW(pool({}, PoolKind::sum), ShapeError);
    EXPECT_EQ(parse_pool("avg"), PoolKind::average);
    EXPECT_THROW(parse_pool("median"), ConfigError);
}

TEST(Relation, IdentityEncoderSingleJointSymmetry) {
    // g = identity on the concatenated pair: one identity layer of width 2F.
    ParamStore ps;
    Rng rng(1);
    EncoderConfig cfg;
    cfg.widths = {4};
    cfg.activation = Activation::identity;
    PairEncoder enc(ps, "g", 2, cfg, rng);
    enc.layers()[0].weight().value = Tensor::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
    Tape t;
    const Tensor ab = Tensor::from_rows({{0.2, -0.4}, {0.6, 0.8}});
    Var x = inward_aggregate(t.constant(ab), enc, 1);
    // (a|b + b|a)/2 = ((a+b)/2 | (a+b)/2)
    EXPECT_EQ(x.value(), Tensor::from_rows({{0.4, 0.2, 0.4, 0.2}}));
    Var swapped = inward_aggregate(t.constant(swap_persons(ab, 1)), enc, 1);
    EXPECT_EQ(swapped.value(), x.value());
}

TEST(Relation, ZeroFrameZeroBiasGivesZeroHeadInput) {
    ParamStore ps;
    Rng rng(2);
    PairEncoder enc(ps, "g", 3, {}, rng);
    Tape t;
    Var zero = t.constant(Tensor::matrix(2 * 4, 3));
    for (double v : inward_aggregate(zero, enc, 4).value().data()) EXPECT_EQ(v, 0.0);
    for (double v : fused_aggregate(zero, enc, 4).value().data()) EXPECT_EQ(v, 0.0);
}

TEST(Relation, HeadInputWidths) {
    EXPECT_EQ(head_input_width(RelationKind::inward, 16, PoolKind::average), 16u);
    EXPECT_EQ(head_input_width(RelationKind::inward, 16, PoolKind::concatenate), 32u);
    EXPECT_EQ(head_input_width(RelationKind::outward, 16, PoolKind::max), 32u);
    EXPECT_EQ(head_input_width(RelationKind::fused, 16, PoolKind::average), 48u);
}

TEST(Relation, BruteForceOracle) {
    Rng rng(77);
    for (std::size_t J = 2; J <= 4; ++J) {
        for (std::size_t layers = 1; layers <= 2; ++layers) {
            for (PoolKind pk : {PoolKind::average, PoolKind::sum, PoolKind::max, PoolKind::concatenate}) {
                for (PairReduce pr : {PairReduce::mean, PairReduce::sum}) {
                    const std::size_t F = 3, E = 4, frames = 2;
                    const RelationOptions opt{pk, pr};
                    const std::size_t in_w = pooled_width(E, 2, pk);
                    auto fx_in = make_fixture(F, E, layers, in_w, rng);
                    auto fx_out = make_fixture(F, E, layers, 2 * E, rng);
                    auto fx_fused = make_fixture(F, E, layers, in_w + 2 * E, rng);
                    const Tensor x = random_matrix(frames * 2 * J, F, rng);
                    Tape t;
                    Var in = arn_inward(t.constant(x), fx_in->enc, fx_in->head, J, opt);
                    Var out = arn_outward(t.constant(x), fx_out->enc, fx_out->head, J, opt);
                    Var fused = arn_fused(t.constant(x), fx_fused->enc, fx_fused->head, J, opt);
                    for (std::size_t f = 0; f < frames; ++f) {
                        Tensor frame = Tensor::matrix(2 * J, F);
                        for (std::size_t r = 0; r < 2 * J; ++r)
                            for (std::size_t d = 0; d < F; ++d) frame.at(r, d) = x.at(f * 2 * J + r, d);
                        auto head = [](const Fixture& fx, const Vec& v) {
                            return dense(v, fx.head.weight().value, fx.head.bias().value, fx.head.activation());
                        };
                        const Vec ei = head(*fx_in, brute_inward(frame, fx_in->enc, J, opt));
                        const Vec eo = head(*fx_out, brute_outward(frame, fx_out->enc, J, opt));
                        Vec cat = brute_inward(frame, fx_fused->enc, J, opt);
                        Vec o2 = brute_outward(frame, fx_fused->enc, J, opt);
                        cat.insert(cat.end(), o2.begin(), o2.end());
                        const Vec ef = head(*fx_fused, cat);
                        for (std::size_t c = 0; c < 5; ++c) {
                            EXPECT_NEAR(in.value().at(f, c), ei[c], 1e-12) << "J=" << J << " pool " << to_string(pk);
                            EXPECT_NEAR(out.value().at(f, c), eo[c], 1e-12) << "J=" << J;
                            EXPECT_NEAR(fused.value().at(f, c), ef[c], 1e-12) << "J=" << J;
                        }
                    }
                }
            }
        }
    }
}

TEST(Relation, FusedIsConcatenationOfParts) {
    Rng rng(5);
    auto fx = make_fixture(3, 6, 2, 1, rng);
    const Tensor x = random_matrix(3 * 2 * 2, 3, rng);
    Tape t;
    Var fused = fused_aggregate(t.constant(x), fx->enc, 2);
    Var in = inward_aggregate(t.constant(x), fx->enc, 2);
    Var out = outward_aggregate(t.constant(x), fx->enc, 2);
    ASSERT_EQ(fused.cols(), 18u);
    for (std::size_t f = 0; f < 3; ++f)
        for (std::size_t c = 0; c < 18; ++c)
            EXPECT_EQ(fused.value().at(f, c), c < 6 ? in.value().at(f, c) : out.value().at(f, c - 6));
}

TEST(Relation, InwardPersonSwapIsBitIdentical) {
    Rng rng(6);
    for (std::size_t layers : {1u, 2u})
        for (PoolKind pk : {PoolKind::average, PoolKind::sum, PoolKind::max}) {
            auto fx = make_fixture(3, 5, layers, 5, rng);
            const std::size_t J = 4;
            const Tensor x = random_matrix(3 * 2 * J, 3, rng);
            Tape t;
            Var a = arn_inward(t.constant(x), fx->enc, fx->head, J, {pk});
            Var b = arn_inward(t.constant(swap_persons(x, J)), fx->enc, fx->head, J, {pk});
            EXPECT_EQ(a.value(), b.value()) << to_string(pk);
        }
}

TEST(Relation, OutwardPersonSwapPermutesHalves) {
    Rng rng(8);
    auto fx = make_fixture(3, 5, 2, 10, rng);
    const std::size_t J = 3;
    const Tensor x = random_matrix(2 * 2 * J, 3, rng);
    Tape t;
    Var a = outward_aggregate(t.constant(x), fx->enc, J);
    Var b = outward_aggregate(t.constant(swap_persons(x, J)), fx->enc, J);
    for (std::size_t f = 0; f < 2; ++f)
        for (std::size_t c = 0; c < 5; ++c) {
            EXPECT_EQ(a.value().at(f, c), b.value().at(f, c + 5));
            EXPECT_EQ(a.value().at(f, c + 5), b.value().at(f, c));
        }
    // Identical persons give identical halves.
    Tensor same = x;
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t d = 0; d < 3; ++d) same.at(J + j, d) = same.at(j, d);
    Var s = outward_aggregate(t.constant(same), fx->enc, J);
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(s.value().at(0, c), s.value().at(0, c + 5));
}

TEST(Relation, PairOrderInvariance) {
    // Reordering the pair list changes summation order only.
    Rng rng(9);
    auto fx = make_fixture(3, 4, 2, 4, rng);
    const std::size_t J = 4;
    const Tensor x = random_matrix(2 * J, 3, rng);
    std::vector<std::size_t> first, second;
    for (const auto& p : enumerate_inward_pairs(J)) {
        first.push_back(p.from_person * J + p.first);
        second.push_back(p.to_person * J + p.second);
    }
    std::vector<std::size_t> perm(first.size() / 2);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (int trial = 0; trial < 5; ++trial) {
        rng.shuffle(std::span<std::size_t>(perm));
        std::vector<std::size_t> f2, s2;
        for (std::size_t dir = 0; dir < 2; ++dir)
            for (auto i : perm) {
                f2.push_back(first[dir * perm.size() + i]);
                s2.push_back(second[dir * perm.size() + i]);
            }
        for (PoolKind pk : {PoolKind::average, PoolKind::sum, PoolKind::max}) {
                Tape t;
                Var base = pool_rows(fx->enc.encode_reduce(t.constant(x), first, second, J * J, PairReduce::mean), 2, pk);
                Var shuf = pool_rows(fx->enc.encode_reduce(t.constant(x), f2, s2, J * J, PairReduce::mean), 2, pk);
                for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(base.value()[c], shuf.value()[c], 1e-14);
                // Swapping the two direction blocks is exact for commutative pools.
                std::vector<std::size_t> fs(f2.begin() + static_cast<long>(perm.size()), f2.end());
                fs.insert(fs.end(), f2.begin(), f2.begin() + static_cast<long>(perm.size()));
                std::vector<std::size_t> ss(s2.begin() + static_cast<long>(perm.size()), s2.end());
                ss.insert(ss.end(), s2.begin(), s2.begin() + static_cast<long>(perm.size()));
                Var flipped = pool_rows(fx->enc.encode_reduce(t.constant(x), fs, ss, J * J, PairReduce::mean), 2, pk);
                EXPECT_EQ(flipped.value(), shuf.value());
            }
    }
}

TEST(Relation, FusedPathMatchesMaterializedPairs) {
    Rng rng(10);
    for (Activation act : {Activation::relu, Activation::tanh, Activation::sigmoid, Activation::identity}) {
        auto fx = make_fixture(3, 6, 1, 6, rng, act);
        const std::size_t J = 3;
        const Tensor x = random_matrix(2 * 2 * J, 3, rng);
        std::vector<std::size_t> first, second;
        for (std::size_t f = 0; f < 2; ++f)
            for (const auto& p : enumerate_inward_pairs(J)) {
                first.push_back(f * 2 * J + p.from_person * J + p.first);
                second.push_back(f * 2 * J + p.to_person * J + p.second);
            }
        for (PairReduce pr : {PairReduce::mean, PairReduce::sum}) {
            Tape t;
            Var fast = fx->enc.encode_reduce(t.constant(x), first, second, J * J, pr);
            Var slow = op::segment_reduce(fx->enc.encode(t.constant(x), first, second), J * J,
                                          pr == PairReduce::mean ? op::Reduce::mean : op::Reduce::sum);
            for (std::size_t i = 0; i < fast.value().size(); ++i) EXPECT_NEAR(fast.value()[i], slow.value()[i], 1e-13);
        }
    }
}

TEST(Relation, SharedEncoderParametersReceiveAllPairGradients) {
    // Every pair reads the same g_θ block: the stage owns exactly one W/b per layer.
    Rng rng(12);
    ParamStore ps;
    EncoderConfig ec;
    ec.widths = {4, 4};
    RelationConfig rc;
    RelationStage stage(ps, "rel", 3, 3, ec, rc, rng);
    EXPECT_EQ(ps.size(), 6u); // 2 encoder layers + head, W and b each
    Tape t;
    Var y = stage.forward(t.constant(random_matrix(2 * 3, 3, rng)));
    ps.zero_grad();
    t.backward(arnlstm::testing::probe(y, rng));
    double norm = 0;
    for (double g : ps.at("rel/g_theta/dense_1/W").grad.data()) norm += std::abs(g);
    EXPECT_GT(norm, 0.0);
}

TEST(Encoder, Pruning) {
    Rng rng(13);
    ParamStore ps;
    EncoderConfig cfg;
    cfg.widths = {5, 6, 7};
    cfg.names = {"dense_a", "dense_b", "dense_c"};
    PairEncoder enc(ps, "g", 2, cfg, rng);
    EXPECT_EQ(enc.pruned("dense_c").depth(), 3u);
    auto two = enc.pruned("dense_b");
    EXPECT_EQ(two.depth(), 2u);
    EXPECT_EQ(two.output_width(), 6u);
    EXPECT_THROW(enc.pruned("conv"), ConfigError);

    ParamStore ps2;
    EncoderConfig dup;
    dup.widths = {3, 4, 5};
    dup.names = {"x_relu", "y_relu", "out"};
    PairEncoder enc2(ps2, "g", 2, dup, rng);
    auto p = prune_encoder(enc2, "relu");
    EXPECT_EQ(p.depth(), 2u); // topmost suffix match wins
    EXPECT_EQ(p.output_width(), 4u);
}

TEST(RelationStage, PruningDropsParametersAndNamesHead) {
    Rng rng(14);
    ParamStore ps;
    EncoderConfig ec;
    ec.widths = {4, 4};
    ec.prune_at_layer = "dense_1";
    RelationConfig rc;
    rc.kind = RelationKind::inward;
    RelationStage stage(ps, "rel", 3, 2, ec, rc, rng);
    EXPECT_FALSE(ps.contains("rel/g_theta/dense_2/W"));
    EXPECT_TRUE(ps.contains("rel/f_phi_inward/W"));
    EXPECT_EQ(stage.encoder().depth(), 1u);
    EXPECT_THROW(parse_relation("sideways"), ConfigError);
    EXPECT_EQ(parse_relation("inward_outward"), RelationKind::fused);
}
