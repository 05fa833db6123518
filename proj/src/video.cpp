#include "hfprep/video.hpp"

#include <cmath>

namespace hfprep {

std::string to_string(PixLayout layout) {
    switch (layout) {
        case PixLayout::YUV420: return "yuv420";
        case PixLayout::YUV444: return "yuv444";
        case PixLayout::GRAY: return "gray";
        case PixLayout::RGB: return "rgb";
    }
    return "?";
}

int plane_count(PixLayout layout) {
    return layout == PixLayout::GRAY ? 1 : 3;
}

void plane_dims(PixLayout layout, int width, int height, int p, int& pw, int& ph) {
    if (p == 0 || layout == PixLayout::YUV444 || layout == PixLayout::RGB) {
        pw = width;
        ph = height;
        return;
    }
    if (layout == PixLayout::YUV420) {
        // Chroma dimensions round up so odd sizes stay representable.
        pw = (width + 1) / 2;
        ph = (height + 1) / 2;
        return;
    }
    throw InvalidArgument("plane index " + std::to_string(p) + " out of range for " +
                          to_string(layout));
}

Frame make_frame(PixLayout layout, int width, int height, float fill) {
    Frame f;
    f.layout = layout;
    const int n = plane_count(layout);
    f.planes.reserve(n);
    for (int p = 0; p < n; ++p) {
        int pw, ph;
        plane_dims(layout, width, height, p, pw, ph);
        f.planes.emplace_back(pw, ph, fill);
    }
    return f;
}

void validate_video(const PlanarVideo& video) {
    if (video.width <= 0 || video.height <= 0)
        throw InvalidArgument("video dimensions must be positive, got " +
                              std::to_string(video.width) + "x" + std::to_string(video.height));
    if (video.fps_num <= 0 || video.fps_den <= 0)
        throw InvalidArgument("frame rate must be positive, got " +
                              std::to_string(video.fps_num) + "/" + std::to_string(video.fps_den));
    const int np = plane_count(video.pix_layout);
    for (size_t i = 0; i < video.frames.size(); ++i) {
        const Frame& f = video.frames[i];
        if (f.layout != video.pix_layout)
            throw InvalidArgument("frame " + std::to_string(i) + " layout " +
                                  to_string(f.layout) + " differs from video layout " +
                                  to_string(video.pix_layout));
        if (static_cast<int>(f.planes.size()) != np)
            throw InvalidArgument("frame " + std::to_string(i) + " has " +
                                  std::to_string(f.planes.size()) + " planes, expected " +
                                  std::to_string(np));
        for (int p = 0; p < np; ++p) {
            int pw, ph;
            plane_dims(video.pix_layout, video.width, video.height, p, pw, ph);
            const Plane& pl = f.planes[p];
            if (pl.width != pw || pl.height != ph ||
                pl.data.size() != static_cast<size_t>(pw) * ph)
                throw InvalidArgument("frame " + std::to_string(i) + " plane " +
                                      std::to_string(p) + " has wrong dimensions");
        }
    }
}

Plane to_grayscale(const Frame& frame) {
    if (frame.planes.empty())
        throw InvalidArgument("to_grayscale: frame has no planes");
    if (frame.layout != PixLayout::RGB)
        return frame.planes[0];

    const Plane& r = frame.planes[0];
    const Plane& g = frame.planes[1];
    const Plane& b = frame.planes[2];
    Plane out(r.width, r.height);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<float>(0.299 * r.data[i] + 0.587 * g.data[i] +
                                         0.114 * b.data[i]);
    return out;
}

} // namespace hfprep
