#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfprep/error.hpp"

namespace hfprep {

enum class PixLayout { YUV420, YUV444, GRAY, RGB };

std::string to_string(PixLayout layout);

// One image plane of row-major float samples. Nominal range is [0, 255]
// but values may leave it between filter stages; clipping happens only at
// container write time.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    Plane() = default;
    Plane(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

// A frame is a set of planes: 1 for GRAY, 3 for YUV420/YUV444/RGB.
struct Frame {
    PixLayout layout = PixLayout::GRAY;
    std::vector<Plane> planes;

    const Plane& luma() const { return planes.at(0); }
    Plane& luma() { return planes.at(0); }
};

struct PlanarVideo {
    std::vector<Frame> frames;
    int width = 0;
    int height = 0;
    int fps_num = 25;
    int fps_den = 1;
    PixLayout pix_layout = PixLayout::GRAY;

    int frame_count() const { return static_cast<int>(frames.size()); }
    double duration_seconds() const {
        return static_cast<double>(frames.size()) * fps_den / fps_num;
    }
    double fps() const { return static_cast<double>(fps_num) / fps_den; }
};

// Expected plane dimensions for plane index `p` under `layout`.
void plane_dims(PixLayout layout, int width, int height, int p, int& pw, int& ph);
int plane_count(PixLayout layout);

// Builds an empty frame with correctly sized planes.
Frame make_frame(PixLayout layout, int width, int height, float fill = 0.0f);

// Checks the PlanarVideo invariants (shared dimensions/layout, positive
// metadata) and throws InvalidArgument on violation.
void validate_video(const PlanarVideo& video);

// For YUV layouts returns the luma plane unchanged (bitwise). For RGB,
// applies BT.601 weights (0.299, 0.587, 0.114). GRAY passes through.
Plane to_grayscale(const Frame& frame);

} // namespace hfprep
