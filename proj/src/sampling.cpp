#include "hfprep/sampling.hpp"

#include <algorithm>
#include <sstream>

namespace hfprep {

void validate_sampler(const SamplerConfig& cfg) {
    if (cfg.segments < 1 || cfg.frames_per_segment < 1)
        throw InvalidArgument("sampler segments/frames_per_segment must be >= 1");
    if (cfg.grid < 1 || cfg.patch < 1)
        throw InvalidArgument("sampler grid/patch must be >= 1");
}

std::string SampleTrace::serialize() const {
    std::ostringstream ss;
    ss << "frames=";
    for (size_t i = 0; i < frame_indices.size(); ++i)
        ss << (i ? "," : "") << frame_indices[i];
    ss << ";offsets=";
    for (size_t i = 0; i < offsets.size(); ++i)
        ss << (i ? "," : "") << offsets[i].x << ":" << offsets[i].y;
    return ss.str();
}

SampleTrace SampleTrace::deserialize(const std::string& text) {
    SampleTrace t;
    const size_t sep = text.find(";offsets=");
    if (text.rfind("frames=", 0) != 0 || sep == std::string::npos)
        throw ParseError("bad trace text", 0);
    auto parse_list = [](const std::string& s, auto&& emit) {
        std::istringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) emit(item);
    };
    parse_list(text.substr(7, sep - 7),
               [&](const std::string& s) { t.frame_indices.push_back(std::stoi(s)); });
    parse_list(text.substr(sep + 9), [&](const std::string& s) {
        const size_t c = s.find(':');
        if (c == std::string::npos) throw ParseError("bad offset '" + s + "'", 0);
        t.offsets.push_back({std::stoi(s.substr(0, c)), std::stoi(s.substr(c + 1))});
    });
    return t;
}

std::vector<int> temporal_sample_indices(int frame_count, const SamplerConfig& cfg,
                                         Rng& rng) {
    validate_sampler(cfg);
    const int needed = cfg.clip_frames();
    if (frame_count < needed)
        throw InvalidArgument("video too short for temporal sampling: " +
                              std::to_string(frame_count) + " frames, need at least " +
                              std::to_string(needed));
    std::vector<int> out;
    out.reserve(needed);
    for (int s = 0; s < cfg.segments; ++s) {
        // Near-equal contiguous spans via the floor partition.
        const int begin = static_cast<int>(static_cast<int64_t>(s) * frame_count / cfg.segments);
        const int end = static_cast<int>(static_cast<int64_t>(s + 1) * frame_count / cfg.segments);
        const int last_start = end - cfg.frames_per_segment;
        const int start = begin + static_cast<int>(rng.below(static_cast<uint64_t>(last_start - begin + 1)));
        for (int k = 0; k < cfg.frames_per_segment; ++k) out.push_back(start + k);
    }
    return out;
}

std::vector<int> temporal_sample(const PlanarVideo& video, const SamplerConfig& cfg,
                                 Rng& rng) {
    return temporal_sample_indices(video.frame_count(), cfg, rng);
}

namespace {

struct CellSpan {
    int begin = 0;
    int size = 0;
};

// Integer-division cells; the last cell absorbs the remainder.
CellSpan cell_span(int extent, int grid, int index) {
    const int base = extent / grid;
    CellSpan s;
    s.begin = index * base;
    s.size = (index == grid - 1) ? extent - s.begin : base;
    return s;
}

} // namespace

std::vector<PatchOffset> draw_patch_offsets(int width, int height,
                                            const SamplerConfig& cfg, Rng& rng) {
    validate_sampler(cfg);
    if (width < cfg.fragment_side() || height < cfg.fragment_side())
        throw InvalidArgument("plane " + std::to_string(width) + "x" + std::to_string(height) +
                              " smaller than grid*patch = " +
                              std::to_string(cfg.fragment_side()));
    std::vector<PatchOffset> offsets;
    offsets.reserve(static_cast<size_t>(cfg.grid) * cfg.grid);
    for (int r = 0; r < cfg.grid; ++r) {
        const CellSpan ys = cell_span(height, cfg.grid, r);
        for (int c = 0; c < cfg.grid; ++c) {
            const CellSpan xs = cell_span(width, cfg.grid, c);
            PatchOffset o;
            o.x = xs.begin + static_cast<int>(rng.below(static_cast<uint64_t>(xs.size - cfg.patch + 1)));
            o.y = ys.begin + static_cast<int>(rng.below(static_cast<uint64_t>(ys.size - cfg.patch + 1)));
            offsets.push_back(o);
        }
    }
    return offsets;
}

Plane assemble_fragment(const Plane& plane, const SamplerConfig& cfg,
                        const std::vector<PatchOffset>& offsets) {
    validate_sampler(cfg);
    if (offsets.size() != static_cast<size_t>(cfg.grid) * cfg.grid)
        throw InvalidArgument("offset list has " + std::to_string(offsets.size()) +
                              " entries, expected " + std::to_string(cfg.grid * cfg.grid));
    const int side = cfg.fragment_side();
    Plane out(side, side);
    for (int r = 0; r < cfg.grid; ++r) {
        for (int c = 0; c < cfg.grid; ++c) {
            const PatchOffset& o = offsets[static_cast<size_t>(r) * cfg.grid + c];
            if (o.x < 0 || o.y < 0 || o.x + cfg.patch > plane.width ||
                o.y + cfg.patch > plane.height)
                throw InvalidArgument("patch offset outside plane");
            for (int py = 0; py < cfg.patch; ++py) {
                const float* src = &plane.data[static_cast<size_t>(o.y + py) * plane.width + o.x];
                float* dst = &out.data[static_cast<size_t>(r * cfg.patch + py) * side +
                                       c * cfg.patch];
                std::copy(src, src + cfg.patch, dst);
            }
        }
    }
    return out;
}

Plane spatial_fragment(const Plane& plane, const SamplerConfig& cfg, Rng& rng) {
    return assemble_fragment(plane, cfg, draw_patch_offsets(plane.width, plane.height, cfg, rng));
}

SampleClip build_input_clip(const PlanarVideo& video, const SamplerConfig& cfg,
                            const GaussianSpec& mask_spec, Rng& rng) {
    validate_sampler(cfg);
    const int n = video.frame_count();
    if (n == 0) throw InvalidArgument("cannot sample an empty video");

    // Short videos are padded by repeating the last frame: sample a
    // virtual clip-length video, then clamp indices to the real range.
    const int needed = cfg.clip_frames();
    const int virtual_n = n < needed ? needed : n;
    // Temporal indices are drawn before patch offsets; this order is part
    // of the determinism contract.
    std::vector<int> indices = temporal_sample_indices(virtual_n, cfg, rng);
    for (int& i : indices)
        if (i >= n) i = n - 1;

    SampleTrace trace;
    trace.frame_indices = indices;
    trace.offsets = draw_patch_offsets(video.width, video.height, cfg, rng);
    return build_clip_from_trace(video, cfg, mask_spec, trace);
}

SampleClip build_clip_from_trace(const PlanarVideo& video, const SamplerConfig& cfg,
                                 const GaussianSpec& mask_spec,
                                 const SampleTrace& trace) {
    SampleClip clip;
    clip.trace = trace;
    clip.frames.reserve(trace.frame_indices.size());
    clip.hf_masks.reserve(trace.frame_indices.size());
    for (int idx : trace.frame_indices) {
        if (idx < 0 || idx >= video.frame_count())
            throw InvalidArgument("trace frame index " + std::to_string(idx) +
                                  " outside video of " + std::to_string(video.frame_count()) +
                                  " frames");
        const Plane gray = to_grayscale(video.frames[static_cast<size_t>(idx)]);
        Plane frag = assemble_fragment(gray, cfg, trace.offsets);
        Frame wrap;
        wrap.layout = PixLayout::GRAY;
        wrap.planes.push_back(frag);
        clip.hf_masks.push_back(highfreq_mask(wrap, mask_spec));
        clip.frames.push_back(std::move(frag));
    }
    return clip;
}

} // namespace hfprep
