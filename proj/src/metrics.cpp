#include "hfprep/metrics.hpp"

#include <cmath>

namespace hfprep {

double plcc(const PairedScores& pairs) {
    const auto& p = pairs.predictions;
    const auto& g = pairs.ground_truth;
    if (p.size() != g.size())
        throw InvalidArgument("plcc: length mismatch " + std::to_string(p.size()) + " vs " +
                              std::to_string(g.size()));
    if (p.size() < 2) throw InvalidArgument("plcc: need at least 2 pairs");
    const double n = static_cast<double>(p.size());
    double mp = 0.0, mg = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        mp += p[i];
        mg += g[i];
    }
    mp /= n;
    mg /= n;
    double cov = 0.0, vp = 0.0, vg = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double dp = p[i] - mp, dg = g[i] - mg;
        cov += dp * dg;
        vp += dp * dp;
        vg += dg * dg;
    }
    if (vp == 0.0 || vg == 0.0)
        throw InvalidArgument("plcc: undefined for a constant sequence");
    return cov / std::sqrt(vp * vg);
}

double rmse(const PairedScores& pairs) {
    const auto& p = pairs.predictions;
    const auto& g = pairs.ground_truth;
    if (p.size() != g.size())
        throw InvalidArgument("rmse: length mismatch " + std::to_string(p.size()) + " vs " +
                              std::to_string(g.size()));
    if (p.empty()) throw InvalidArgument("rmse: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - g[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(p.size()));
}

std::vector<std::complex<double>> dft2d(const Plane& plane) {
    const int W = plane.width, H = plane.height;
    if (W <= 0 || H <= 0) throw InvalidArgument("dft2d: empty plane");
    const double two_pi = 2.0 * M_PI;

    // Separable direct transform: rows, then columns.
    std::vector<std::complex<double>> rows(static_cast<size_t>(W) * H);
    for (int y = 0; y < H; ++y) {
        const float* src = &plane.data[static_cast<size_t>(y) * W];
        for (int u = 0; u < W; ++u) {
            std::complex<double> acc(0.0, 0.0);
            for (int x = 0; x < W; ++x) {
                const double ang = -two_pi * u * x / W;
                acc += static_cast<double>(src[x]) *
                       std::complex<double>(std::cos(ang), std::sin(ang));
            }
            rows[static_cast<size_t>(y) * W + u] = acc;
        }
    }
    std::vector<std::complex<double>> out(static_cast<size_t>(W) * H);
    for (int u = 0; u < W; ++u) {
        for (int v = 0; v < H; ++v) {
            std::complex<double> acc(0.0, 0.0);
            for (int y = 0; y < H; ++y) {
                const double ang = -two_pi * v * y / H;
                acc += rows[static_cast<size_t>(y) * W + u] *
                       std::complex<double>(std::cos(ang), std::sin(ang));
            }
            out[static_cast<size_t>(v) * W + u] = acc;
        }
    }
    return out;
}

double hf_energy(const Plane& plane, double cutoff_fraction) {
    if (!(cutoff_fraction > 0.0 && cutoff_fraction < 1.0))
        throw InvalidArgument("hf_energy: cutoff_fraction must be in (0,1), got " +
                              std::to_string(cutoff_fraction));
    const int W = plane.width, H = plane.height;
    // DC is excluded anyway; shifting by the first sample only changes
    // the DC bin and keeps a constant plane at exactly zero energy.
    Plane shifted = plane;
    const float dc = plane.data.empty() ? 0.0f : plane.data[0];
    for (auto& v : shifted.data) v -= dc;
    const auto spec = dft2d(shifted);
    const double max_radius = std::sqrt(0.5); // corner of the Nyquist square
    double acc = 0.0;
    for (int v = 0; v < H; ++v) {
        const int fv = v <= H / 2 ? v : H - v;
        const double rv = static_cast<double>(fv) / H;
        for (int u = 0; u < W; ++u) {
            if (u == 0 && v == 0) continue;
            const int fu = u <= W / 2 ? u : W - u;
            const double ru = static_cast<double>(fu) / W;
            const double radius = std::sqrt(ru * ru + rv * rv) / max_radius;
            if (radius > cutoff_fraction) acc += std::norm(spec[static_cast<size_t>(v) * W + u]);
        }
    }
    return acc;
}

} // namespace hfprep
