#pragma once

#include <string>
#include <vector>

#include "hfprep/error.hpp"

namespace hfprep {

// Named tensor collection, serialized bit-exactly.
//
// Binary layout: magic "FFPN", u32 version=1, u32 tensor count; per
// tensor: u16 name length, UTF-8 name, u8 ndims, u32 dims, raw
// little-endian f32 data; trailing u64 equal to the byte length of
// everything before it.
struct ModelCheckpoint {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::vector<float> data;
    };
    std::vector<Entry> tensors;

    const Entry* find(const std::string& name) const {
        for (const auto& e : tensors)
            if (e.name == name) return &e;
        return nullptr;
    }
    Entry& add(const std::string& name, std::vector<int> shape) {
        tensors.push_back({name, std::move(shape), {}});
        tensors.back().data.resize(
            static_cast<size_t>([&] {
                long long n = 1;
                for (int d : tensors.back().shape) n *= d;
                return n;
            }()));
        return tensors.back();
    }
};

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

} // namespace hfprep
