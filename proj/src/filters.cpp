#include "hfprep/filters.hpp"

#include <cmath>

namespace hfprep {

namespace {

// Single-fold index mapping; valid while |i| stays within one plane span,
// which validate_plane_spec guarantees.
inline int map_index(int i, int n, Boundary b) {
    if (i >= 0 && i < n) return i;
    if (b == Boundary::Wrap) {
        i %= n;
        return i < 0 ? i + n : i;
    }
    return i < 0 ? -1 - i : 2 * n - 1 - i;
}

void validate_plane_spec(const Plane& x, const GaussianSpec& spec) {
    validate_spec(spec);
    if (x.width <= 0 || x.height <= 0)
        throw InvalidArgument("empty plane");
    const int m = x.width < x.height ? x.width : x.height;
    if (spec.ksize > 2 * m + 1)
        throw InvalidArgument("ksize " + std::to_string(spec.ksize) +
                              " too large for a " + std::to_string(x.width) + "x" +
                              std::to_string(x.height) + " plane");
}

} // namespace

void validate_spec(const GaussianSpec& spec) {
    if (spec.ksize < 3 || spec.ksize % 2 == 0)
        throw InvalidArgument("ksize must be odd and >= 3, got " +
                              std::to_string(spec.ksize));
    if (!(spec.sigma > 0.0))
        throw InvalidArgument("sigma must be positive, got " + std::to_string(spec.sigma));
}

std::vector<double> gaussian_kernel(const GaussianSpec& spec) {
    validate_spec(spec);
    const int r = spec.ksize / 2;
    std::vector<double> k(spec.ksize);
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[i + r] = std::exp(-(static_cast<double>(i) * i) / (2.0 * spec.sigma * spec.sigma));
        total += k[i + r];
    }
    for (double& v : k) v /= total;
    return k;
}

Plane gaussian_lowpass(const Plane& x, const GaussianSpec& spec) {
    validate_plane_spec(x, spec);
    const std::vector<double> k = gaussian_kernel(spec);
    const int r = spec.ksize / 2;
    const int w = x.width, h = x.height;

    // Horizontal pass into a double buffer, vertical pass out of it; the
    // only float rounding is the final store.
    std::vector<double> tmp(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const float* row = &x.data[static_cast<size_t>(y) * w];
        double* trow = &tmp[static_cast<size_t>(y) * w];
        for (int xx = 0; xx < w; ++xx) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += k[t + r] * row[map_index(xx + t, w, spec.boundary)];
            trow[xx] = acc;
        }
    }
    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += k[t + r] * tmp[static_cast<size_t>(map_index(y + t, h, spec.boundary)) * w + xx];
            out.data[static_cast<size_t>(y) * w + xx] = static_cast<float>(acc);
        }
    }
    return out;
}

std::vector<double> highfreq_residual(const Plane& x, const GaussianSpec& spec) {
    validate_plane_spec(x, spec);
    const std::vector<double> k = gaussian_kernel(spec);
    const int r = spec.ksize / 2;
    const int w = x.width, h = x.height;

    // Product-form 2D taps; evaluating sum K[q]*(x[p]-x[p+q]) keeps the
    // residual of a constant plane exactly zero.
    std::vector<double> k2(static_cast<size_t>(spec.ksize) * spec.ksize);
    for (int a = 0; a < spec.ksize; ++a)
        for (int b = 0; b < spec.ksize; ++b)
            k2[static_cast<size_t>(a) * spec.ksize + b] = k[a] * k[b];

    std::vector<double> res(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const bool y_interior = (y >= r && y < h - r);
        for (int xx = 0; xx < w; ++xx) {
            const double c = x.data[static_cast<size_t>(y) * w + xx];
            double acc = 0.0;
            if (y_interior && xx >= r && xx < w - r) {
                for (int dy = -r; dy <= r; ++dy) {
                    const float* row = &x.data[static_cast<size_t>(y + dy) * w + xx];
                    const double* kr = &k2[static_cast<size_t>(dy + r) * spec.ksize];
                    for (int dx = -r; dx <= r; ++dx)
                        acc += kr[dx + r] * (c - row[dx]);
                }
            } else {
                for (int dy = -r; dy <= r; ++dy) {
                    const int sy = map_index(y + dy, h, spec.boundary);
                    const double* kr = &k2[static_cast<size_t>(dy + r) * spec.ksize];
                    for (int dx = -r; dx <= r; ++dx) {
                        const int sx = map_index(xx + dx, w, spec.boundary);
                        acc += kr[dx + r] * (c - x.data[static_cast<size_t>(sy) * w + sx]);
                    }
                }
            }
            res[static_cast<size_t>(y) * w + xx] = acc;
        }
    }
    return res;
}

Plane usm_filter(const Plane& x, double alpha, const GaussianSpec& spec) {
    if (!std::isfinite(alpha))
        throw InvalidArgument("alpha must be finite");
    if (alpha == 0.0) return x; // passthrough contract, bitwise

    const std::vector<double> res = highfreq_residual(x, spec);
    Plane out(x.width, x.height);
    for (size_t i = 0; i < res.size(); ++i)
        out.data[i] = static_cast<float>(alpha * res[i] + static_cast<double>(x.data[i]));
    return out;
}

Plane highfreq_mask(const Frame& frame, const GaussianSpec& spec) {
    const Plane gray = to_grayscale(frame);
    const std::vector<double> res = highfreq_residual(gray, spec);
    Plane out(gray.width, gray.height);
    for (size_t i = 0; i < res.size(); ++i) out.data[i] = static_cast<float>(res[i]);
    return out;
}

std::unique_ptr<Preprocessor> make_preprocessor(const std::string& name,
                                                const GaussianSpec& spec) {
    if (name == "usm") return std::make_unique<UsmPreprocessor>(spec);
    throw InvalidArgument("unknown preprocessor '" + name + "' (available: usm)");
}

PlanarVideo preprocess_video(const PlanarVideo& video, const Preprocessor& pre,
                             double alpha) {
    validate_video(video);
    PlanarVideo out = video;
    if (alpha == 0.0) return out;
    for (Frame& f : out.frames) f.planes[0] = pre.apply(f.planes[0], alpha);
    return out;
}

} // namespace hfprep
