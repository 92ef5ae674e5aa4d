#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gda/image.hpp"

namespace gda::nn {

// Binary layout (little-endian):
//   magic "GDACKPT\0" | u32 version | u64 metadata length | metadata bytes (JSON)
//   | u64 array count | per array: u64 length, float32[length]
inline constexpr char kCheckpointMagic[8] = {'G', 'D', 'A', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    std::string metadata;
    std::vector<std::vector<float>> arrays;
};

namespace detail {
template <typename V>
void put(std::ostream& os, const V& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}
template <typename V>
V get(std::istream& is) {
    V v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!is) throw Error("checkpoint: truncated file");
    return v;
}
}  // namespace detail

inline void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open checkpoint for writing: " + path);
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::put(os, kCheckpointVersion);
    detail::put(os, static_cast<std::uint64_t>(ckpt.metadata.size()));
    os.write(ckpt.metadata.data(), static_cast<std::streamsize>(ckpt.metadata.size()));
    detail::put(os, static_cast<std::uint64_t>(ckpt.arrays.size()));
    for (const auto& a : ckpt.arrays) {
        detail::put(os, static_cast<std::uint64_t>(a.size()));
        os.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(float)));
    }
    if (!os) throw Error("failed writing checkpoint: " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open checkpoint: " + path);
    char magic[sizeof(kCheckpointMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw Error("not a checkpoint file: " + path);
    const auto version = detail::get<std::uint32_t>(is);
    if (version != kCheckpointVersion)
        throw Error("unsupported checkpoint version " + std::to_string(version) + " in " + path);
    Checkpoint ckpt;
    const auto meta_len = detail::get<std::uint64_t>(is);
    ckpt.metadata.resize(meta_len);
    is.read(ckpt.metadata.data(), static_cast<std::streamsize>(meta_len));
    const auto count = detail::get<std::uint64_t>(is);
    for (std::uint64_t k = 0; k < count; ++k) {
        const auto len = detail::get<std::uint64_t>(is);
        std::vector<float> a(len);
        is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(len * sizeof(float)));
        if (!is) throw Error("checkpoint: truncated array data");
        ckpt.arrays.push_back(std::move(a));
    }
    return ckpt;
}

/// Flattens parameter values and buffers of a layer tree, in collection order.
template <typename Net>
std::vector<std::vector<float>> export_state(Net& net) {
    std::vector<std::vector<float>> out;
    for (auto* p : net.params()) out.emplace_back(p->value.begin(), p->value.end());
    std::vector<std::vector<float>*> buffers;
    net.collect_buffers(buffers);
    for (auto* b : buffers) out.emplace_back(b->begin(), b->end());
    return out;
}

/// Restores state written by export_state starting at `offset`; returns the
/// index of the first unused array.
template <typename Net>
std::size_t import_state(Net& net, const std::vector<std::vector<float>>& arrays, std::size_t offset = 0) {
    std::size_t k = offset;
    auto take = [&](std::vector<float>& dst) {
        if (k >= arrays.size() || arrays[k].size() != dst.size()) throw Error("checkpoint does not match network shape");
        dst = arrays[k++];
    };
    for (auto* p : net.params()) take(p->value);
    std::vector<std::vector<float>*> buffers;
    net.collect_buffers(buffers);
    for (auto* b : buffers) take(*b);
    return k;
}

}  // namespace gda::nn
