#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "arnlstm/skeleton/pose.hpp"

// Dataset CSV: header `seq_id,class_id,frame,person,joint,x,y,z`, one row per
// (frame, person, joint), coordinates printed with 6 decimals, LF endings.
namespace arnlstm {

inline constexpr std::string_view kCsvHeader = "seq_id,class_id,frame,person,joint,x,y,z";

/// Translate so the first frame's person-0 joint 0 sits at the origin, then
/// divide by the largest absolute coordinate. All-zero (absent) persons stay zero.
inline void normalize_sequence(SkeletonSequence& seq) {
    PoseArray& pose = seq.pose;
    if (pose.frames == 0 || pose.joints == 0) return;
    double origin[3] = {0, 0, 0};
    for (std::size_t d = 0; d < std::min<std::size_t>(pose.dims, 3); ++d) origin[d] = pose.at(0, 0, 0, d);
    std::vector<bool> present(pose.persons, false);
    for (std::size_t t = 0; t < pose.frames; ++t)
        for (std::size_t p = 0; p < pose.persons; ++p)
            for (std::size_t j = 0; j < pose.joints; ++j)
                for (std::size_t d = 0; d < pose.dims; ++d)
                    if (pose.at(t, p, j, d) != 0.0) present[p] = true;
    double maxabs = 0.0;
    for (std::size_t t = 0; t < pose.frames; ++t)
        for (std::size_t p = 0; p < pose.persons; ++p) {
            if (!present[p]) continue;
            for (std::size_t j = 0; j < pose.joints; ++j)
                for (std::size_t d = 0; d < pose.dims; ++d) {
                    double& v = pose.at(t, p, j, d);
                    v -= d < 3 ? origin[d] : 0.0;
                    maxabs = std::max(maxabs, std::abs(v));
                }
        }
    if (maxabs > 0)
        for (double& v : pose.values) v /= maxabs;
}

struct CsvOptions {
    bool normalize = false;
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

struct CsvRow {
    std::size_t frame, person, joint;
    double xyz[3];
    std::size_t line;
};

struct SequenceRows {
    std::string id;
    int label;
    std::size_t first_line;
    std::vector<CsvRow> rows;
};

inline std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line); }

} // namespace detail

/// Parse dataset CSV text. `source` names the input in error messages.
inline std::vector<SkeletonSequence> parse_csv(std::string_view text, const CsvOptions& options = {},
                                               const std::string& source = "<csv>") {
    using detail::where;
    std::vector<detail::SequenceRows> groups;
    std::map<std::string, std::size_t, std::less<>> group_of;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kCsvHeader) {
                throw DataError(where(source, lineno) + ": header must be '" + std::string(kCsvHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const auto f = detail::split_commas(line);
        if (f.size() != 8) {
            throw DataError(where(source, lineno) + ": malformed row, expected 8 fields, got " +
                            std::to_string(f.size()));
        }
        int label = 0;
        long frame = 0, person = 0, joint = 0;
        detail::CsvRow row{};
        row.line = lineno;
        bool ok = !f[0].empty() && detail::parse_number(f[1], label) && detail::parse_number(f[2], frame) &&
                  detail::parse_number(f[3], person) && detail::parse_number(f[4], joint);
        for (int d = 0; d < 3 && ok; ++d) ok = detail::parse_number(f[5 + d], row.xyz[d]);
        if (!ok || frame < 0 || joint < 0 || label < 0) {
            throw DataError(where(source, lineno) + ": malformed row '" + std::string(line) + "'");
        }
        if (person != 0 && person != 1) {
            throw DataError(where(source, lineno) + ": person index must be 0 or 1, got " + std::to_string(person));
        }
        row.frame = static_cast<std::size_t>(frame);
        row.person = static_cast<std::size_t>(person);
        row.joint = static_cast<std::size_t>(joint);
        auto [it, inserted] = group_of.try_emplace(std::string(f[0]), groups.size());
        if (inserted) groups.push_back({std::string(f[0]), label, lineno, {}});
        auto& g = groups[it->second];
        if (g.label != label) {
            throw DataError(where(source, lineno) + ": sequence '" + g.id + "' changes class_id from " +
                            std::to_string(g.label) + " to " + std::to_string(label));
        }
        g.rows.push_back(row);
    }

    std::vector<SkeletonSequence> out;
    std::size_t dataset_joints = 0;
    for (auto& g : groups) {
        const auto& first = g.rows.front();
        std::size_t joints = 0;
        for (const auto& r : g.rows)
            if (r.frame == first.frame && r.person == first.person) ++joints;
        std::size_t frames = 0;
        for (const auto& r : g.rows) {
            if (r.joint >= joints) {
                throw DataError(where(source, r.line) + ": sequence '" + g.id + "' row has joint index " +
                                std::to_string(r.joint) + " but the sequence has " + std::to_string(joints) +
                                " joints");
            }
            frames = std::max(frames, r.frame + 1);
        }
        if (dataset_joints == 0) dataset_joints = joints;
        if (joints != dataset_joints) {
            throw DataError(where(source, g.first_line) + ": sequence '" + g.id + "' has " + std::to_string(joints) +
                            " joints, dataset has " + std::to_string(dataset_joints));
        }
        if (frames < 2) {
            throw DataError(where(source, g.first_line) + ": sequence '" + g.id + "' has fewer than 2 frames");
        }
        SkeletonSequence seq{g.id, g.label, PoseArray(frames, 2, joints, 3)};
        std::vector<std::size_t> count(frames * 2, 0), block_line(frames * 2, 0);
        for (const auto& r : g.rows) {
            const std::size_t b = r.frame * 2 + r.person;
            if (count[b]++ == 0) block_line[b] = r.line;
            for (std::size_t d = 0; d < 3; ++d) {
                double& slot = seq.pose.at(r.frame, r.person, r.joint, d);
                slot = r.xyz[d];
            }
        }
        for (std::size_t b = 0; b < count.size(); ++b) {
            const std::size_t t = b / 2, p = b % 2;
            if (count[b] == 0) {
                if (p == 0) {
                    throw DataError(where(source, g.first_line) + ": sequence '" + g.id + "' is missing frame " +
                                    std::to_string(t));
                }
                continue;
            }
            if (count[b] != joints) {
                throw DataError(where(source, block_line[b]) + ": sequence '" + g.id + "' frame " + std::to_string(t) +
                                " person " + std::to_string(p) + " has " + std::to_string(count[b]) +
                                " joint rows, expected " + std::to_string(joints));
            }
        }
        if (options.normalize) normalize_sequence(seq);
        for (const auto& r : g.rows)
            for (std::size_t d = 0; d < 3; ++d) {
                const double v = seq.pose.at(r.frame, r.person, r.joint, d);
                if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
                    throw DataError(where(source, r.line) + ": sequence '" + g.id + "' coordinate " +
                                    std::to_string(v) + " outside [-1, 1]");
                }
            }
        out.push_back(std::move(seq));
    }
    return out;
}

inline std::vector<SkeletonSequence> load_csv(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_csv(text, options, path);
}

inline std::string format_coordinate(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string to_csv(const std::vector<SkeletonSequence>& sequences) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& s : sequences) {
        if (s.id.empty() || s.id.find_first_of(",\n\r") != std::string::npos) {
            throw DataError("sequence id '" + s.id + "' cannot be written to CSV");
        }
        const PoseArray& p = s.pose;
        if (p.dims != 3) throw DataError("CSV schema needs 3 coordinates per joint");
        for (std::size_t t = 0; t < p.frames; ++t)
            for (std::size_t q = 0; q < p.persons; ++q)
                for (std::size_t j = 0; j < p.joints; ++j) {
                    out += s.id;
                    out += ',' + std::to_string(s.label) + ',' + std::to_string(t) + ',' + std::to_string(q) + ',' +
                           std::to_string(j);
                    for (std::size_t d = 0; d < 3; ++d) out += ',' + format_coordinate(p.at(t, q, j, d));
                    out += '\n';
                }
    }
    return out;
}

inline void write_csv(const std::string& path, const std::vector<SkeletonSequence>& sequences) {
    const std::string text = to_csv(sequences);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset '" + path + "'");
    out << text;
    if (!out) throw DataError("failed writing dataset '" + path + "'");
}

} // namespace arnlstm
