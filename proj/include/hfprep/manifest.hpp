#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hfprep {

struct ManifestEntry {
    std::string video_id;
    std::string path; // resolved against the manifest's directory
    std::optional<double> alpha_label;
    std::optional<double> mos;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    std::string root;

    const ManifestEntry* find(const std::string& id) const {
        for (const auto& e : entries)
            if (e.video_id == id) return &e;
        return nullptr;
    }
};

// CSV columns: video_id,path[,alpha_label][,mos]. Validates unique ids;
// with check_paths also requires every path to exist.
Manifest load_manifest(const std::string& path, bool check_paths = true);

// Seeded shuffle then split; train gets floor(n * train_fraction) entries.
std::pair<Manifest, Manifest> split_manifest(const Manifest& manifest,
                                             double train_fraction, uint64_t seed);

} // namespace hfprep
