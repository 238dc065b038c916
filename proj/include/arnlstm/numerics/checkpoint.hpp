#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "arnlstm/numerics/params.hpp"

// Checkpoint layout (all integers little-endian):
//   8 bytes   magic "ARNCKPT1"
//   u64       entry count
//   per entry, sorted by path:
//     u32     path length, then the UTF-8 path bytes
//     u32     rank, then rank × u64 axis lengths
//     f64     product(shape) IEEE-754 values, row-major
namespace arnlstm::checkpoint {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline constexpr char kMagic[8] = {'A', 'R', 'N', 'C', 'K', 'P', 'T', '1'};

namespace detail {

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw DataError("checkpoint truncated at byte " + std::to_string(pos));
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

} // namespace detail

inline std::string encode(const std::map<std::string, Tensor>& values) {
    std::string out(kMagic, sizeof(kMagic));
    detail::put<std::uint64_t>(out, values.size());
    for (const auto& [path, t] : values) {
        detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(path.size()));
        out += path;
        detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) detail::put<std::uint64_t>(out, d);
        for (double v : t.data()) detail::put<double>(out, v);
    }
    return out;
}

inline std::map<std::string, Tensor> decode(const std::string& bytes) {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a checkpoint file (bad magic)");
    }
    std::size_t pos = sizeof(kMagic);
    const auto count = detail::get<std::uint64_t>(bytes, pos);
    std::map<std::string, Tensor> values;
    for (std::uint64_t e = 0; e < count; ++e) {
        const auto len = detail::get<std::uint32_t>(bytes, pos);
        if (pos + len > bytes.size()) throw DataError("checkpoint truncated in parameter path");
        std::string path = bytes.substr(pos, len);
        pos += len;
        const auto rank = detail::get<std::uint32_t>(bytes, pos);
        Shape shape(rank);
        for (auto& d : shape) d = detail::get<std::uint64_t>(bytes, pos);
        std::vector<double> data(shape_size(shape));
        for (double& v : data) v = detail::get<double>(bytes, pos);
        values.emplace(std::move(path), Tensor(std::move(shape), std::move(data)));
    }
    if (pos != bytes.size()) throw DataError("checkpoint has trailing bytes");
    return values;
}

inline void save(const ParamStore& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    const std::string bytes = encode(params.snapshot());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

inline std::map<std::string, Tensor> read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

inline void load(ParamStore& params, const std::string& path) { params.restore(read(path)); }

} // namespace arnlstm::checkpoint
