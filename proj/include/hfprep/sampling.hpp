#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfprep/filters.hpp"
#include "hfprep/rng.hpp"
#include "hfprep/video.hpp"

namespace hfprep {

struct SamplerConfig {
    int segments = 16;           // non-overlapping time segments
    int frames_per_segment = 2;  // consecutive frames per segment
    int grid = 16;               // cells per side
    int patch = 16;              // pixels per patch side

    int clip_frames() const { return segments * frames_per_segment; }
    int fragment_side() const { return grid * patch; }
};

void validate_sampler(const SamplerConfig& cfg);

// Patch offset inside one grid cell, in absolute plane coordinates.
struct PatchOffset {
    int x = 0;
    int y = 0;
};

// Everything needed to rebuild a clip from its source video: which frames
// were taken and where each cell's patch sits. Offsets are shared across
// all frames of the clip.
struct SampleTrace {
    std::vector<int> frame_indices;
    std::vector<PatchOffset> offsets; // grid*grid entries, row-major

    std::string serialize() const;
    static SampleTrace deserialize(const std::string& text);
};

struct SampleClip {
    std::vector<Plane> frames;   // grayscale fragments
    std::vector<Plane> hf_masks; // high-frequency masks of the fragments
    SampleTrace trace;
};

// Partitions [0, frame_count) into cfg.segments contiguous near-equal
// spans and draws cfg.frames_per_segment consecutive indices at a random
// start inside each. Output is strictly increasing.
// Throws if the video is shorter than segments * frames_per_segment.
std::vector<int> temporal_sample_indices(int frame_count, const SamplerConfig& cfg,
                                         Rng& rng);
std::vector<int> temporal_sample(const PlanarVideo& video, const SamplerConfig& cfg,
                                 Rng& rng);

// Draws one uniformly random patch position per grid cell (row-major cell
// order; x before y within a cell). Cells use integer division with the
// remainder attached to the last row/column.
std::vector<PatchOffset> draw_patch_offsets(int width, int height,
                                            const SamplerConfig& cfg, Rng& rng);

// Copies the patch windows verbatim into a grid*patch square mosaic.
Plane assemble_fragment(const Plane& plane, const SamplerConfig& cfg,
                        const std::vector<PatchOffset>& offsets);

// draw_patch_offsets + assemble_fragment in one call.
Plane spatial_fragment(const Plane& plane, const SamplerConfig& cfg, Rng& rng);

// Full network-input construction: temporal sampling, grayscale
// conversion, fragmentation with patch positions shared across the clip,
// and a high-frequency mask computed on each fragment. Videos shorter
// than the clip length are padded by repeating the last frame.
SampleClip build_input_clip(const PlanarVideo& video, const SamplerConfig& cfg,
                            const GaussianSpec& mask_spec, Rng& rng);

// Deterministic rebuild from a stored trace.
SampleClip build_clip_from_trace(const PlanarVideo& video, const SamplerConfig& cfg,
                                 const GaussianSpec& mask_spec,
                                 const SampleTrace& trace);

} // namespace hfprep
