#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "seaflow/errors.hpp"
#include "seaflow/tensor.hpp"

namespace seaflow {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts unsupported");

inline constexpr char kCheckpointMagic[4] = {'S', 'F', 'T', 'C'};
inline constexpr uint32_t kCheckpointVersion = 1;

// Flat binary layout: magic, u32 version, u64 tensor count; per tensor:
// u32 name length, name bytes, u32 rank, u64 dims[rank], f64 data.
inline void save_checkpoint(const std::string& path,
                            const std::vector<std::pair<std::string, Tensor>>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path);
    auto put = [&out](const void* p, size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put(kCheckpointMagic, 4);
    put(&kCheckpointVersion, 4);
    uint64_t count = tensors.size();
    put(&count, 8);
    for (const auto& [name, t] : tensors) {
        uint32_t len = static_cast<uint32_t>(name.size());
        put(&len, 4);
        put(name.data(), name.size());
        uint32_t rank = 2;
        put(&rank, 4);
        uint64_t dims[2] = {static_cast<uint64_t>(t.rows()), static_cast<uint64_t>(t.cols())};
        put(dims, 16);
        put(t.values().data(), t.numel() * sizeof(double));
    }
    if (!out) throw IoError("short write on checkpoint " + path);
}

inline std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    auto get = [&in, &path](void* p, size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in) throw IoError("truncated checkpoint " + path);
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw IoError("bad checkpoint magic in " + path);
    uint32_t version = 0;
    get(&version, 4);
    if (version != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    uint64_t count = 0;
    get(&count, 8);
    std::vector<std::pair<std::string, Tensor>> tensors;
    tensors.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        uint32_t len = 0;
        get(&len, 4);
        std::string name(len, '\0');
        get(name.data(), len);
        uint32_t rank = 0;
        get(&rank, 4);
        if (rank != 2) throw IoError("unsupported tensor rank in " + path);
        uint64_t dims[2];
        get(dims, 16);
        std::vector<double> data(dims[0] * dims[1]);
        get(data.data(), data.size() * sizeof(double));
        tensors.emplace_back(std::move(name),
                             Tensor::param(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                                           std::move(data)));
    }
    return tensors;
}

}  // namespace seaflow
