#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "arnlstm/skeleton/csv.hpp"
#include "arnlstm/skeleton/folds.hpp"
#include "arnlstm/skeleton/modality.hpp"
#include "arnlstm/skeleton/synthetic.hpp"
#include "arnlstm/skeleton/temporal.hpp"
#include "test_util.hpp"

using namespace arnlstm;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Single-person sequence with x = xs[t][j], y = z = 0.
SkeletonSequence line_sequence(const std::vector<std::vector<double>>& xs) {
    SkeletonSequence s{"s", 0, PoseArray(xs.size(), 2, xs[0].size())};
    for (std::size_t t = 0; t < xs.size(); ++t)
        for (std::size_t j = 0; j < xs[t].size(); ++j) s.pose.at(t, 0, j, 0) = xs[t][j];
    return s;
}

SyntheticConfig small_config(std::uint64_t seed, double noise = 0.02) {
    SyntheticConfig c;
    c.classes = SyntheticConfig::first_families(6);
    c.per_class = 5;
    c.seed = seed;
    c.noise = noise;
    return c;
}

} // namespace

TEST(Csv, KnownRowsLoadExactly) {
    const std::string text =
        "seq_id,class_id,frame,person,joint,x,y,z\n"
        "a,3,0,0,0,0.000000,0.000000,0.000000\n"
        "a,3,0,0,1,0.500000,-0.250000,1.000000\n"
        "a,3,1,0,0,0.100000,0.200000,0.300000\n"
        "a,3,1,0,1,-1.000000,0.000000,0.125000\n";
    auto seqs = parse_csv(text);
    ASSERT_EQ(seqs.size(), 1u);
    const auto& s = seqs[0];
    EXPECT_EQ(s.id, "a");
    EXPECT_EQ(s.label, 3);
    EXPECT_EQ(s.frames(), 2u);
    EXPECT_EQ(s.joints(), 2u);
    EXPECT_EQ(s.pose.at(0, 0, 1, 0), 0.5);
    EXPECT_EQ(s.pose.at(0, 0, 1, 1), -0.25);
    EXPECT_EQ(s.pose.at(1, 0, 1, 2), 0.125);
    EXPECT_EQ(s.pose.at(1, 0, 0, 1), 0.2);
    // Absent second person is zero-filled.
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(s.pose.at(1, 1, j, 0), 0.0);
}

TEST(Csv, EmptyFileGivesEmptyList) {
    EXPECT_TRUE(parse_csv("").empty());
    const std::string path = arnlstm::testing::temp_path("empty.csv");
    std::ofstream(path).close();
    EXPECT_TRUE(load_csv(path).empty());
}

TEST(Csv, JointCountChangeNamesSequenceAndLine) {
    const std::string text =
        "seq_id,class_id,frame,person,joint,x,y,z\n"
        "a,0,0,0,0,0,0,0\n"
        "a,0,0,0,1,0,0,0\n"
        "a,0,1,0,0,0,0,0\n"
        "a,0,1,0,1,0,0,0\n"
        "b,0,0,0,0,0,0,0\n"
        "b,0,0,0,1,0,0,0\n"
        "b,0,0,0,2,0,0,0\n"
        "b,0,1,0,0,0,0,0\n"
        "b,0,1,0,1,0,0,0\n"
        "b,0,1,0,2,0,0,0\n";
    try {
        parse_csv(text, {}, "data.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
        EXPECT_NE(msg.find("data.csv:"), std::string::npos) << msg;
    }
}

TEST(Csv, MalformedInputsAreRejected) {
    const std::string h = "seq_id,class_id,frame,person,joint,x,y,z\n";
    EXPECT_THROW(parse_csv("id,class\n"), DataError);
    EXPECT_THROW(parse_csv(h + "a,0,0,0,0,0,0\n"), DataError);
    EXPECT_THROW(parse_csv(h + "a,0,0,2,0,0,0,0\na,0,1,2,0,0,0,0\n"), DataError);
    EXPECT_THROW(parse_csv(h + "a,0,0,0,0,0,0,0\n"), DataError); // one frame only
    EXPECT_THROW(parse_csv(h + "a,0,0,0,0,1.5,0,0\na,0,1,0,0,0,0,0\n"), DataError);
    EXPECT_THROW(parse_csv(h + "a,0,0,0,0,x,0,0\na,0,1,0,0,0,0,0\n"), DataError);
}

TEST(Csv, WriteReadWriteIsByteIdentical) {
    auto data = generate_synthetic(small_config(4));
    const std::string p1 = arnlstm::testing::temp_path("rt1.csv"), p2 = arnlstm::testing::temp_path("rt2.csv");
    write_csv(p1, data);
    auto back = load_csv(p1);
    ASSERT_EQ(back.size(), data.size());
    write_csv(p2, back);
    EXPECT_EQ(read_file(p1), read_file(p2));
    EXPECT_EQ(read_file(p1).substr(0, kCsvHeader.size()), kCsvHeader);
}

TEST(Topology, ValidationAndPresets) {
    EXPECT_THROW(BoneTopology({1, 0}), ConfigError);    // cycle, no root
    EXPECT_THROW(BoneTopology({0, 1}), ConfigError);    // two roots
    EXPECT_THROW(BoneTopology({0, 5}), ConfigError);    // out of range
    EXPECT_EQ(BoneTopology::ntu25().joints(), 25u);
    EXPECT_EQ(BoneTopology::ntu25().root(), 20u);
    auto chain = BoneTopology::spine_and_arm(8);
    EXPECT_EQ(chain.root(), 0u);
    EXPECT_EQ(chain.parent(4), 2u); // arm hangs off the shoulder joint
    EXPECT_THROW(BoneTopology::preset("spine_arm"), ConfigError);
    const std::string path = arnlstm::testing::temp_path("chain.topo");
    chain.write(path);
    EXPECT_EQ(BoneTopology::read(path).parents(), chain.parents());
}

TEST(Bone, ChainHandSubtraction) {
    auto s = line_sequence({{0, 1, 3}, {0, 1, 3}});
    auto bones = derive_bone(s, BoneTopology({0, 0, 1}));
    EXPECT_EQ(bones.kind, ModalityKind::bone);
    EXPECT_EQ(bones.values.at(0, 0, 0, 0), 0.0);
    EXPECT_EQ(bones.values.at(0, 0, 1, 0), 1.0);
    EXPECT_EQ(bones.values.at(0, 0, 2, 0), 2.0);
}

TEST(Bone, CoincidentJointsAndRoot) {
    auto s = line_sequence({{0.4, 0.4, 0.4}, {0.4, 0.4, 0.4}});
    for (double v : derive_bone(s, BoneTopology({0, 0, 1})).values.values) EXPECT_EQ(v, 0.0);
    auto data = generate_synthetic(small_config(2));
    auto topo = BoneTopology::spine_and_arm(8);
    auto b = derive_bone(data[7], topo);
    for (std::size_t t = 0; t < b.values.frames; ++t)
        for (std::size_t p = 0; p < 2; ++p)
            for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(b.values.at(t, p, topo.root(), d), 0.0);
}

TEST(Bone, PathSumReconstructsDisplacement) {
    auto data = generate_synthetic(small_config(3));
    auto topo = BoneTopology::spine_and_arm(8);
    for (const auto& seq : data) {
        auto b = derive_bone(seq, topo);
        for (std::size_t leaf = 0; leaf < 8; ++leaf) {
            const auto path = topo.path_from_root(leaf);
            for (std::size_t d = 0; d < 3; ++d) {
                double sum = 0;
                for (std::size_t k = 1; k < path.size(); ++k) sum += b.values.at(5, 1, path[k], d);
                EXPECT_NEAR(sum, seq.pose.at(5, 1, leaf, d) - seq.pose.at(5, 1, topo.root(), d), 1e-12);
            }
        }
    }
}

TEST(Motion, Examples) {
    auto stat = derive_motion({ModalityKind::joint, line_sequence({{0.3, 0.1}, {0.3, 0.1}, {0.3, 0.1}}).pose});
    EXPECT_EQ(stat.kind, ModalityKind::joint_motion);
    EXPECT_EQ(stat.values.frames, 2u);
    for (double v : stat.values.values) EXPECT_EQ(v, 0.0);

    auto lin = derive_motion({ModalityKind::joint, line_sequence({{0}, {1}, {2}, {3}}).pose});
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(lin.values.at(t, 0, 0, 0), 1.0);

    auto hand = derive_motion({ModalityKind::joint, line_sequence({{0}, {0.5}, {0.2}}).pose});
    EXPECT_DOUBLE_EQ(hand.values.at(0, 0, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(hand.values.at(1, 0, 0, 0), 0.2 - 0.5);

    EXPECT_THROW(derive_motion({ModalityKind::joint, line_sequence({{0}}).pose}), DataError);
    EXPECT_THROW(derive_motion(stat), ConfigError);
}

TEST(Motion, IsLinear) {
    auto data = generate_synthetic(small_config(5));
    const PoseArray& x = data[0].pose;
    const PoseArray& y = data[11].pose;
    PoseArray combo = x;
    const double a = 0.7, b = -1.3;
    for (std::size_t i = 0; i < combo.values.size(); ++i) combo.values[i] = a * x.values[i] + b * y.values[i];
    auto mx = derive_motion({ModalityKind::joint, x}), my = derive_motion({ModalityKind::joint, y});
    auto mc = derive_motion({ModalityKind::joint, combo});
    for (std::size_t i = 0; i < mc.values.values.size(); ++i)
        EXPECT_NEAR(mc.values.values[i], a * mx.values.values[i] + b * my.values.values[i], 1e-12);
}

TEST(Modality, FrameCountsAndDispatch) {
    auto data = generate_synthetic(small_config(6));
    auto topo = BoneTopology::spine_and_arm(8);
    EXPECT_EQ(derive_modality(data[0], topo, ModalityKind::joint).values.frames, 20u);
    EXPECT_EQ(derive_modality(data[0], topo, ModalityKind::bone).values.frames, 20u);
    EXPECT_EQ(derive_modality(data[0], topo, ModalityKind::joint_motion).values.frames, 19u);
    EXPECT_EQ(derive_modality(data[0], topo, ModalityKind::bone_motion).values.frames, 19u);
    EXPECT_EQ(parse_modality("bone-motion"), ModalityKind::bone_motion);
    EXPECT_THROW(parse_modality("rgb"), ConfigError);
}

TEST(Gaussian, Examples) {
    EXPECT_EQ(gaussian_weights(1, 2.0).weights, std::vector<double>{1.0});
    for (double sigma : {0.3, 1.0, 7.0}) {
        auto w = gaussian_weights(3, sigma).weights;
        EXPECT_EQ(w[0], w[2]);
        EXPECT_GT(w[1], w[0]);
        EXPECT_NEAR(2 * w[0] + w[1], 1.0, 1e-15);
    }
    // 1/√(2π), evaluated independently.
    EXPECT_NEAR(gauss(0.0, 1.0), 0.3989422804014327, 1e-15);
    EXPECT_DOUBLE_EQ(default_sigma(20), 20.0 / 6.0);
    EXPECT_THROW(gaussian_weights(0, 1.0), ConfigError);
    EXPECT_THROW(gaussian_weights(4, 0.0), ConfigError);
}

TEST(Gaussian, NormalizedSymmetricCenterPeaked) {
    for (std::size_t T : {2u, 3u, 10u, 99u, 1000u, 10000u}) {
        for (double sigma : {0.1, 1.0, static_cast<double>(T) / 6.0, 100.0}) {
            auto w = gaussian_weights(T, sigma).weights;
            double sum = 0;
            for (double v : w) sum += v;
            EXPECT_NEAR(sum, 1.0, 1e-12) << "T=" << T << " sigma=" << sigma;
            for (std::size_t t = 0; t < T; ++t) ASSERT_EQ(w[t], w[T - 1 - t]);
            // Non-increasing away from the center; strictly while weights are normal doubles.
            for (std::size_t t = 0; t + 1 < (T + 1) / 2; ++t) {
                ASSERT_LE(w[t], w[t + 1]);
                if (w[t] >= std::numeric_limits<double>::min()) ASSERT_LT(w[t], w[t + 1]);
            }
        }
    }
}

TEST(Sampling, IndexFormula) {
    EXPECT_EQ(sample_indices(5, 3), (std::vector<std::size_t>{0, 2, 4}));
    EXPECT_EQ(sample_indices(2, 4), (std::vector<std::size_t>{0, 0, 1, 1}));
    EXPECT_EQ(sample_indices(7, 7), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
    for (std::size_t T = 1; T < 40; ++T)
        for (std::size_t n = 2; n < 40; ++n) {
            auto idx = sample_indices(T, n);
            EXPECT_EQ(idx.front(), 0u);
            EXPECT_EQ(idx.back(), T - 1);
            for (std::size_t k = 1; k < n; ++k) EXPECT_LE(idx[k - 1], idx[k]);
        }
}

TEST(Sampling, IdentityAtTargetLength) {
    auto data = generate_synthetic(small_config(7));
    EXPECT_EQ(sample_frames(data[3], 20), data[3]);
}

TEST(Synthetic, ApproachAndDivergeDistances) {
    SyntheticConfig c = small_config(9, 0.0);
    auto data = generate_synthetic(c);
    for (const auto& s : data) {
        const auto family = c.classes[static_cast<std::size_t>(s.label)];
        if (family != MotionFamily::approach && family != MotionFamily::diverge) continue;
        for (std::size_t t = 1; t < s.frames(); ++t) {
            if (family == MotionFamily::approach) EXPECT_LT(centroid_distance(s.pose, t), centroid_distance(s.pose, t - 1));
            else EXPECT_GT(centroid_distance(s.pose, t), centroid_distance(s.pose, t - 1));
        }
    }
}

TEST(Synthetic, DeterministicAndNormalized) {
    auto a = generate_synthetic(small_config(11)), b = generate_synthetic(small_config(11));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, generate_synthetic(small_config(12)));
    ASSERT_EQ(a.size(), 30u);
    for (const auto& s : a) {
        double peak = 0;
        for (double v : s.pose.values) peak = std::max(peak, std::abs(v));
        EXPECT_NEAR(peak, 1.0, 1e-12);
        for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(s.pose.at(0, 0, 0, d), 0.0);
    }
    SyntheticConfig bad = small_config(1);
    bad.per_class = 0;
    EXPECT_THROW(generate_synthetic(bad), ConfigError);
}

TEST(Folds, TenPerClassGivesTwoPerFold) {
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 10; ++k) labels.push_back(c);
    auto split = stratified_folds(labels, 5, 1);
    for (std::size_t f = 0; f < 5; ++f) {
        std::vector<int> per(3, 0);
        for (auto i : split.test_indices(f)) ++per[static_cast<std::size_t>(labels[i])];
        EXPECT_EQ(per, (std::vector<int>{2, 2, 2}));
    }
}

TEST(Folds, PartitionAndBalance) {
    std::vector<int> labels(11, 0);
    for (int k = 0; k < 7; ++k) labels.push_back(1);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto split = stratified_folds(labels, 5, seed);
        std::multiset<std::size_t> seen;
        for (std::size_t f = 0; f < 5; ++f) {
            auto test = split.test_indices(f), train = split.train_indices(f);
            EXPECT_EQ(test.size() + train.size(), labels.size());
            seen.insert(test.begin(), test.end());
        }
        EXPECT_EQ(seen.size(), labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(seen.count(i), 1u);
        for (int c = 0; c < 2; ++c) {
            std::size_t lo = 100, hi = 0;
            for (std::size_t f = 0; f < 5; ++f) {
                std::size_t n = 0;
                for (auto i : split.test_indices(f)) n += labels[i] == c;
                lo = std::min(lo, n);
                hi = std::max(hi, n);
            }
            EXPECT_LE(hi - lo, 1u);
        }
    }
    EXPECT_THROW(stratified_folds(std::vector<int>{0, 0, 1}, 5, 0), DataError);
}

TEST(Folds, HoldoutIsStratifiedAndDisjoint) {
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c)
        for (int k = 0; k < 10; ++k) labels.push_back(c);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < labels.size(); i += 1) subset.push_back(i);
    auto h = stratified_holdout(labels, subset, 0.2, 3);
    EXPECT_EQ(h.validation.size(), 8u);
    EXPECT_EQ(h.train.size(), 32u);
    std::set<std::size_t> v(h.validation.begin(), h.validation.end());
    for (auto i : h.train) EXPECT_FALSE(v.contains(i));
}
