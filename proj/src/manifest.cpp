#include "hfprep/manifest.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "hfprep/csv.hpp"
#include "hfprep/rng.hpp"

namespace fs = std::filesystem;

namespace hfprep {

Manifest load_manifest(const std::string& path, bool check_paths) {
    const CsvTable table = read_csv(path);
    const int c_id = table.require_column("video_id", path);
    const int c_path = table.require_column("path", path);
    const int c_alpha = table.column("alpha_label");
    const int c_mos = table.column("mos");

    Manifest m;
    m.root = fs::path(path).has_parent_path() ? fs::path(path).parent_path().string() : ".";
    std::set<std::string> ids;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto field = [&](int c) -> std::string {
            return c >= 0 && static_cast<size_t>(c) < row.size() ? row[static_cast<size_t>(c)]
                                                                 : std::string();
        };
        ManifestEntry e;
        e.video_id = field(c_id);
        if (e.video_id.empty())
            throw InvalidArgument(path + ": row " + std::to_string(r + 2) +
                                  " has an empty video_id");
        if (!ids.insert(e.video_id).second)
            throw InvalidArgument(path + ": duplicate video_id '" + e.video_id + "'");
        std::string p = field(c_path);
        if (p.empty())
            throw InvalidArgument(path + ": row for '" + e.video_id + "' has an empty path");
        e.path = fs::path(p).is_absolute() ? p : (fs::path(m.root) / p).string();
        if (check_paths && !fs::exists(e.path))
            throw InvalidArgument(path + ": video '" + e.video_id + "' not found at '" +
                                  e.path + "'");
        if (const std::string a = field(c_alpha); !a.empty()) e.alpha_label = std::stod(a);
        if (const std::string s = field(c_mos); !s.empty()) e.mos = std::stod(s);
        m.entries.push_back(std::move(e));
    }
    return m;
}

std::pair<Manifest, Manifest> split_manifest(const Manifest& manifest,
                                             double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidArgument("train fraction must be in (0,1), got " +
                              std::to_string(train_fraction));
    if (manifest.entries.empty()) throw InvalidArgument("cannot split an empty manifest");

    std::vector<size_t> order(manifest.entries.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, "manifest_split"));
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<size_t>(rng.below(i))]);

    const size_t n_train = static_cast<size_t>(
        std::floor(train_fraction * static_cast<double>(order.size())));
    Manifest train, test;
    train.root = test.root = manifest.root;
    for (size_t i = 0; i < order.size(); ++i)
        (i < n_train ? train : test).entries.push_back(manifest.entries[order[i]]);
    return {train, test};
}

} // namespace hfprep
