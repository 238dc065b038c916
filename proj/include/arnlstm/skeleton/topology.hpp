#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arnlstm/error.hpp"

namespace arnlstm {

/// Kinematic tree: parent[j] is the parent joint of j; the root is its own parent.
class BoneTopology {
public:
    BoneTopology() = default;

    explicit BoneTopology(std::vector<std::size_t> parent) : parent_(std::move(parent)) { validate(); }

    std::size_t joints() const { return parent_.size(); }
    std::size_t parent(std::size_t j) const { return parent_.at(j); }
    const std::vector<std::size_t>& parents() const { return parent_; }

    std::size_t root() const {
        for (std::size_t j = 0; j < parent_.size(); ++j)
            if (parent_[j] == j) return j;
        return 0;
    }

    /// Joints from the root down to `leaf`, inclusive.
    std::vector<std::size_t> path_from_root(std::size_t leaf) const {
        std::vector<std::size_t> path{leaf};
        while (parent_[path.back()] != path.back()) path.push_back(parent_[path.back()]);
        return {path.rbegin(), path.rend()};
    }

    /// Spine of ceil(J/2) joints rooted at 0, arm chain of the rest hanging off
    /// the second-highest spine joint. J=8 gives spine 0-1-2-3 and arm 4-5-6-7.
    static BoneTopology spine_and_arm(std::size_t joints) {
        if (joints < 4) throw ConfigError("spine_and_arm topology needs at least 4 joints");
        const std::size_t spine = (joints + 1) / 2;
        std::vector<std::size_t> parent(joints);
        parent[0] = 0;
        for (std::size_t j = 1; j < spine; ++j) parent[j] = j - 1;
        parent[spine] = spine - 2;
        for (std::size_t j = spine + 1; j < joints; ++j) parent[j] = j - 1;
        return BoneTopology(std::move(parent));
    }

    /// NTU RGB+D 25-joint Kinect v2 tree, 0-based, rooted at the spine-shoulder
    /// joint (index 20) as in the usual bone-stream construction.
    static BoneTopology ntu25() {
        return BoneTopology({1, 20, 20, 2, 20, 4, 5, 6, 20, 8, 9, 10, 0, 12, 13, 14, 0, 16, 17, 18, 20, 22, 7, 24, 11});
    }

    static BoneTopology preset(const std::string& name) {
        if (name == "ntu25") return ntu25();
        if (name.rfind("spine_arm", 0) == 0 && name.size() > 9 &&
            name.find_first_not_of("0123456789", 9) == std::string::npos) {
            return spine_and_arm(std::stoul(name.substr(9)));
        }
        throw ConfigError("unknown topology preset '" + name + "'");
    }

    /// Sidecar format: one parent index per line, line j describes joint j.
    static BoneTopology read(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open topology file '" + path + "'");
        std::vector<std::size_t> parent;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream is(line);
            long v = -1;
            std::string rest;
            if (!(is >> v) || (is >> rest) || v < 0) {
                throw DataError(path + ":" + std::to_string(lineno) + ": expected a non-negative parent index");
            }
            parent.push_back(static_cast<std::size_t>(v));
        }
        try {
            return BoneTopology(std::move(parent));
        } catch (const ConfigError& e) {
            throw DataError(path + ": " + e.what());
        }
    }

    std::string serialize() const {
        std::string out;
        for (auto p : parent_) out += std::to_string(p) + "\n";
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write topology file '" + path + "'");
        out << serialize();
    }

private:
    void validate() const {
        const std::size_t n = parent_.size();
        if (n == 0) throw ConfigError("topology has no joints");
        std::size_t roots = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (parent_[j] >= n) throw ConfigError("joint " + std::to_string(j) + " has out-of-range parent");
            if (parent_[j] == j) ++roots;
        }
        if (roots != 1) throw ConfigError("topology must have exactly one root, found " + std::to_string(roots));
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t cur = j;
            for (std::size_t steps = 0; parent_[cur] != cur; ++steps) {
                if (steps > n) throw ConfigError("topology contains a cycle through joint " + std::to_string(j));
                cur = parent_[cur];
            }
        }
    }

    std::vector<std::size_t> parent_;
};

} // namespace arnlstm
