#pragma once

// Independent reference implementations used as test oracles. These stay
// deliberately naive (direct loops, no shared code with the library) so a
// bug in the implementation cannot hide in its own oracle.

#include <cmath>
#include <complex>
#include <vector>

#include "hfprep/filters.hpp"
#include "hfprep/rng.hpp"
#include "hfprep/tensor.hpp"
#include "hfprep/video.hpp"

namespace oracle {

using hfprep::Boundary;
using hfprep::GaussianSpec;
using hfprep::Plane;

inline int map_idx(int i, int n, Boundary b) {
    while (i < 0 || i >= n) {
        if (b == Boundary::Wrap) {
            i = ((i % n) + n) % n;
        } else {
            if (i < 0) i = -1 - i;
            if (i >= n) i = 2 * n - 1 - i;
        }
    }
    return i;
}

// Full 2D convolution with the product kernel, O(n^2 k^2), double math.
inline std::vector<double> gaussian2d(const Plane& x, const GaussianSpec& spec) {
    const std::vector<double> k = hfprep::gaussian_kernel(spec);
    const int r = spec.ksize / 2;
    std::vector<double> out(x.data.size());
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int sy = map_idx(y + dy, x.height, spec.boundary);
                    const int sx = map_idx(xx + dx, x.width, spec.boundary);
                    acc += k[dy + r] * k[dx + r] *
                           static_cast<double>(x.at(sx, sy));
                }
            out[static_cast<size_t>(y) * x.width + xx] = acc;
        }
    return out;
}

// usm via the oracle low-pass: alpha*(x - L(x)) + x.
inline std::vector<double> usm2d(const Plane& x, double alpha, const GaussianSpec& spec) {
    const std::vector<double> low = gaussian2d(x, spec);
    std::vector<double> out(x.data.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = alpha * (static_cast<double>(x.data[i]) - low[i]) +
                 static_cast<double>(x.data[i]);
    return out;
}

// Direct six-loop conv2d (cross-correlation), no reuse of library code.
template <typename T>
hfprep::TensorT<T> conv2d(const hfprep::TensorT<T>& x, const hfprep::TensorT<T>& w,
                          const hfprep::TensorT<T>& b, int stride, int pad) {
    const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Co = w.dim(0), Kh = w.dim(2), Kw = w.dim(3);
    const int Ho = (H + 2 * pad - Kh) / stride + 1;
    const int Wo = (W + 2 * pad - Kw) / stride + 1;
    hfprep::TensorT<T> y({N, Co, Ho, Wo});
    for (int n = 0; n < N; ++n)
        for (int co = 0; co < Co; ++co)
            for (int oy = 0; oy < Ho; ++oy)
                for (int ox = 0; ox < Wo; ++ox) {
                    double acc = static_cast<double>(b.data[static_cast<size_t>(co)]);
                    for (int ci = 0; ci < Ci; ++ci)
                        for (int ky = 0; ky < Kh; ++ky)
                            for (int kx = 0; kx < Kw; ++kx) {
                                const int iy = oy * stride - pad + ky;
                                const int ix = ox * stride - pad + kx;
                                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                acc += static_cast<double>(
                                           w.data[((static_cast<size_t>(co) * Ci + ci) * Kh +
                                                   ky) *
                                                      Kw +
                                                  kx]) *
                                       static_cast<double>(
                                           x.data[((static_cast<size_t>(n) * Ci + ci) * H +
                                                   iy) *
                                                      W +
                                                  ix]);
                            }
                    y.data[((static_cast<size_t>(n) * Co + co) * Ho + oy) * Wo + ox] =
                        static_cast<T>(acc);
                }
    return y;
}

// Triple-loop matrix-vector reference for the FC layer.
template <typename T>
hfprep::TensorT<T> fc(const hfprep::TensorT<T>& x, const hfprep::TensorT<T>& w,
                      const hfprep::TensorT<T>& b) {
    const int N = x.dim(0), D = x.dim(1), O = w.dim(0);
    hfprep::TensorT<T> y({N, O});
    for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) {
            double acc = static_cast<double>(b.data[static_cast<size_t>(o)]);
            for (int d = 0; d < D; ++d)
                acc += static_cast<double>(x.data[static_cast<size_t>(n) * D + d]) *
                       static_cast<double>(w.data[static_cast<size_t>(o) * D + d]);
            y.data[static_cast<size_t>(n) * O + o] = static_cast<T>(acc);
        }
    return y;
}

// Second piecewise-linear evaluator for RD curves, written independently:
// scans segments from the right instead of the left.
inline double piecewise_linear(const std::vector<std::pair<double, double>>& pts,
                               double x) {
    if (x <= pts.front().first) return pts.front().second;
    if (x >= pts.back().first) return pts.back().second;
    for (size_t i = pts.size() - 1; i > 0; --i) {
        if (x >= pts[i - 1].first && x <= pts[i].first) {
            const double span = pts[i].first - pts[i - 1].first;
            const double t = (x - pts[i - 1].first) / span;
            return (1.0 - t) * pts[i - 1].second + t * pts[i].second;
        }
    }
    return pts.back().second;
}

inline Plane random_plane(int w, int h, hfprep::Rng& rng, double lo = 0.0,
                          double hi = 255.0) {
    Plane p(w, h);
    for (auto& v : p.data) v = static_cast<float>(rng.uniform(lo, hi));
    return p;
}

// 1D transfer function of the normalized kernel at DFT bin k of n.
inline double kernel_transfer(const std::vector<double>& kernel, int k, int n) {
    const int r = static_cast<int>(kernel.size()) / 2;
    double acc = 0.0;
    for (int t = -r; t <= r; ++t)
        acc += kernel[static_cast<size_t>(t + r)] * std::cos(2.0 * M_PI * k * t / n);
    return acc;
}

} // namespace oracle
