#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hfprep/sampling.hpp"
#include "oracles.hpp"

using namespace hfprep;

namespace {

PlanarVideo noise_video(int w, int h, int frames, uint64_t seed) {
    Rng rng(seed);
    PlanarVideo v;
    v.width = w;
    v.height = h;
    v.fps_num = 30;
    v.fps_den = 1;
    v.pix_layout = PixLayout::GRAY;
    for (int f = 0; f < frames; ++f) {
        Frame frame = make_frame(PixLayout::GRAY, w, h);
        for (auto& s : frame.planes[0].data) s = static_cast<float>(rng.uniform(0, 255));
        v.frames.push_back(std::move(frame));
    }
    return v;
}

} // namespace

TEST_CASE("32-frame video with default sampler is fully constrained") {
    SamplerConfig cfg;
    Rng rng(5);
    const auto idx = temporal_sample_indices(32, cfg, rng);
    REQUIRE(idx.size() == 32);
    for (int i = 0; i < 32; ++i) CHECK(idx[static_cast<size_t>(i)] == i);
}

TEST_CASE("64-frame video puts pair k inside [4k, 4k+3] with consecutive members") {
    SamplerConfig cfg;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto idx = temporal_sample_indices(64, cfg, rng);
        REQUIRE(idx.size() == 32);
        for (int k = 0; k < 16; ++k) {
            const int a = idx[static_cast<size_t>(2 * k)];
            const int b = idx[static_cast<size_t>(2 * k + 1)];
            CHECK(b == a + 1);
            CHECK(a >= 4 * k);
            CHECK(b <= 4 * k + 3);
        }
        for (size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
    }
}

TEST_CASE("temporal sampling is deterministic per seed") {
    SamplerConfig cfg;
    Rng a(42), b(42);
    CHECK(temporal_sample_indices(300, cfg, a) == temporal_sample_indices(300, cfg, b));
    Rng c(43);
    CHECK(temporal_sample_indices(300, cfg, a) != temporal_sample_indices(300, cfg, c));
}

TEST_CASE("too-short video reports the required minimum") {
    SamplerConfig cfg;
    Rng rng(1);
    try {
        temporal_sample_indices(31, cfg, rng);
        FAIL("expected error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("32") != std::string::npos);
    }
}

TEST_CASE("256x256 default fragment is the identity mosaic") {
    SamplerConfig cfg;
    Rng rng(3);
    Plane p(256, 256);
    for (size_t i = 0; i < p.data.size(); ++i) p.data[i] = static_cast<float>(i % 251);
    const Plane frag = spatial_fragment(p, cfg, rng);
    CHECK(frag.data == p.data);
}

TEST_CASE("512x512 fragment tiles are verbatim cell windows") {
    SamplerConfig cfg;
    Rng rng(9);
    Plane p(512, 512);
    for (size_t i = 0; i < p.data.size(); ++i)
        p.data[i] = static_cast<float>((i * 2654435761u) % 255);
    const auto offsets = draw_patch_offsets(512, 512, cfg, rng);
    const Plane frag = assemble_fragment(p, cfg, offsets);
    REQUIRE(frag.width == 256);
    for (int r = 0; r < cfg.grid; ++r)
        for (int c = 0; c < cfg.grid; ++c) {
            const PatchOffset& o = offsets[static_cast<size_t>(r) * cfg.grid + c];
            // cells are 32x32 here; the window must stay inside cell (r,c)
            CHECK(o.x >= c * 32);
            CHECK(o.x + cfg.patch <= (c + 1) * 32);
            CHECK(o.y >= r * 32);
            CHECK(o.y + cfg.patch <= (r + 1) * 32);
            for (int py = 0; py < cfg.patch; ++py)
                for (int px = 0; px < cfg.patch; ++px)
                    CHECK(frag.at(c * cfg.patch + px, r * cfg.patch + py) ==
                          p.at(o.x + px, o.y + py));
        }
}

TEST_CASE("fragmentation is deterministic per seed") {
    SamplerConfig cfg;
    Plane p(300, 280);
    for (size_t i = 0; i < p.data.size(); ++i) p.data[i] = static_cast<float>(i % 256);
    Rng a(7), b(7);
    CHECK(spatial_fragment(p, cfg, a).data == spatial_fragment(p, cfg, b).data);
}

TEST_CASE("undersized planes are rejected") {
    SamplerConfig cfg;
    Rng rng(1);
    Plane p(255, 256, 0.0f);
    CHECK_THROWS_AS(spatial_fragment(p, cfg, rng), InvalidArgument);
}

TEST_CASE("constant video yields all-zero masks") {
    SamplerConfig cfg{4, 2, 4, 8}; // 8-frame clips of 32x32
    GaussianSpec mask_spec;
    PlanarVideo v;
    v.width = 64;
    v.height = 64;
    v.fps_num = 30;
    v.fps_den = 1;
    v.pix_layout = PixLayout::GRAY;
    for (int f = 0; f < 8; ++f) v.frames.push_back(make_frame(PixLayout::GRAY, 64, 64, 99.0f));
    Rng rng(21);
    const SampleClip clip = build_input_clip(v, cfg, mask_spec, rng);
    REQUIRE(clip.frames.size() == 8);
    REQUIRE(clip.hf_masks.size() == 8);
    for (const Plane& m : clip.hf_masks)
        for (float s : m.data) CHECK(s == 0.0f);
}

TEST_CASE("exactly-sized video is sampled verbatim") {
    SamplerConfig cfg{16, 2, 16, 16};
    GaussianSpec mask_spec;
    const PlanarVideo v = noise_video(256, 256, 32, 77);
    Rng rng(4);
    const SampleClip clip = build_input_clip(v, cfg, mask_spec, rng);
    for (int f = 0; f < 32; ++f)
        CHECK(clip.frames[static_cast<size_t>(f)].data ==
              v.frames[static_cast<size_t>(f)].planes[0].data);
}

TEST_CASE("clip is bit-identical across equal seeds and replays from its trace") {
    SamplerConfig cfg{4, 2, 8, 16}; // 8 frames, 128x128 fragments
    GaussianSpec mask_spec;
    const PlanarVideo v = noise_video(200, 150, 40, 31);
    Rng a(55), b(55);
    const SampleClip c1 = build_input_clip(v, cfg, mask_spec, a);
    const SampleClip c2 = build_input_clip(v, cfg, mask_spec, b);
    REQUIRE(c1.frames.size() == c2.frames.size());
    for (size_t i = 0; i < c1.frames.size(); ++i) {
        CHECK(c1.frames[i].data == c2.frames[i].data);
        CHECK(c1.hf_masks[i].data == c2.hf_masks[i].data);
    }

    const SampleClip replay = build_clip_from_trace(v, cfg, mask_spec, c1.trace);
    for (size_t i = 0; i < c1.frames.size(); ++i) {
        CHECK(replay.frames[i].data == c1.frames[i].data);
        CHECK(replay.hf_masks[i].data == c1.hf_masks[i].data);
    }

    const SampleTrace round = SampleTrace::deserialize(c1.trace.serialize());
    CHECK(round.frame_indices == c1.trace.frame_indices);
    REQUIRE(round.offsets.size() == c1.trace.offsets.size());
    for (size_t i = 0; i < round.offsets.size(); ++i) {
        CHECK(round.offsets[i].x == c1.trace.offsets[i].x);
        CHECK(round.offsets[i].y == c1.trace.offsets[i].y);
    }
}

TEST_CASE("patch offsets are shared across the frames of one clip") {
    SamplerConfig cfg{2, 2, 4, 8};
    GaussianSpec mask_spec;
    const PlanarVideo v = noise_video(80, 80, 4, 3);
    Rng rng(6);
    const SampleClip clip = build_input_clip(v, cfg, mask_spec, rng);
    CHECK(clip.trace.offsets.size() == 16);
    for (size_t f = 0; f < clip.frames.size(); ++f) {
        const Plane gray =
            to_grayscale(v.frames[static_cast<size_t>(clip.trace.frame_indices[f])]);
        const Plane expect = assemble_fragment(gray, cfg, clip.trace.offsets);
        CHECK(clip.frames[f].data == expect.data);
    }
}

TEST_CASE("masks are the independent highfreq_mask of each fragment") {
    SamplerConfig cfg{2, 2, 4, 8};
    GaussianSpec mask_spec;
    const PlanarVideo v = noise_video(70, 66, 6, 8);
    Rng rng(61);
    const SampleClip clip = build_input_clip(v, cfg, mask_spec, rng);
    for (size_t f = 0; f < clip.frames.size(); ++f) {
        Frame wrap;
        wrap.layout = PixLayout::GRAY;
        wrap.planes.push_back(clip.frames[f]);
        const Plane expect = highfreq_mask(wrap, mask_spec);
        CHECK(clip.hf_masks[f].data == expect.data);
    }
}

TEST_CASE("short videos are padded by repeating the last frame") {
    SamplerConfig cfg{4, 2, 2, 8}; // needs 8 frames, 16x16 fragments
    GaussianSpec mask_spec;
    const PlanarVideo v = noise_video(16, 16, 5, 12);
    Rng rng(14);
    const SampleClip clip = build_input_clip(v, cfg, mask_spec, rng);
    REQUIRE(clip.trace.frame_indices.size() == 8);
    CHECK(clip.trace.frame_indices == std::vector<int>{0, 1, 2, 3, 4, 4, 4, 4});
}
