#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hfprep/filters.hpp"
#include "hfprep/metrics.hpp"
#include "hfprep/rng.hpp"
#include "oracles.hpp"

using namespace hfprep;

TEST_CASE("gaussian kernel is normalized and symmetric") {
    GaussianSpec spec{1.3, 7, Boundary::Reflect};
    const auto k = gaussian_kernel(spec);
    REQUIRE(k.size() == 7);
    double sum = 0.0;
    for (double v : k) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(k[static_cast<size_t>(i)] == k[static_cast<size_t>(6 - i)]);
    CHECK(k[3] > k[2]);

    CHECK_THROWS_AS(validate_spec(GaussianSpec{1.0, 4, Boundary::Reflect}), InvalidArgument);
    CHECK_THROWS_AS(validate_spec(GaussianSpec{0.0, 5, Boundary::Reflect}), InvalidArgument);
    CHECK_THROWS_AS(validate_spec(GaussianSpec{1.0, 1, Boundary::Reflect}), InvalidArgument);
}

TEST_CASE("lowpass preserves constants") {
    for (Boundary b : {Boundary::Reflect, Boundary::Wrap}) {
        GaussianSpec spec{1.0, 5, b};
        Plane c(9, 7, 42.5f);
        const Plane out = gaussian_lowpass(c, spec);
        for (float v : out.data) CHECK(v == doctest::Approx(42.5).epsilon(1e-7));
    }
}

TEST_CASE("impulse response matches the direct 2D convolution oracle") {
    GaussianSpec spec{1.0, 3, Boundary::Reflect};
    Plane x(7, 7, 0.0f);
    x.at(3, 3) = 1.0f;
    const Plane out = gaussian_lowpass(x, spec);
    const auto ref = oracle::gaussian2d(x, spec);
    for (size_t i = 0; i < out.data.size(); ++i)
        CHECK(out.data[i] == doctest::Approx(ref[i]).epsilon(1e-6));
    // center tap squared
    const auto k = gaussian_kernel(spec);
    CHECK(out.at(3, 3) == doctest::Approx(k[1] * k[1]).epsilon(1e-6));
}

TEST_CASE("wrap boundary matches a brute-force circular convolution") {
    GaussianSpec spec{0.8, 5, Boundary::Wrap};
    Plane x(5, 5);
    for (int y = 0; y < 5; ++y)
        for (int xx = 0; xx < 5; ++xx) x.at(xx, y) = static_cast<float>(y * 5 + xx);
    const Plane out = gaussian_lowpass(x, spec);
    const auto ref = oracle::gaussian2d(x, spec);
    for (size_t i = 0; i < out.data.size(); ++i)
        CHECK(out.data[i] == doctest::Approx(ref[i]).epsilon(1e-6));
}

TEST_CASE("lowpass rejects oversized kernels") {
    GaussianSpec spec{1.0, 9, Boundary::Reflect};
    Plane tiny(3, 3, 1.0f);
    CHECK_THROWS_AS(gaussian_lowpass(tiny, spec), InvalidArgument);
}

TEST_CASE("usm at alpha 0 is bitwise identity") {
    Rng rng(1);
    GaussianSpec spec;
    const Plane x = oracle::random_plane(33, 17, rng);
    const Plane out = usm_filter(x, 0.0, spec);
    CHECK(out.data == x.data);
}

TEST_CASE("usm leaves constant planes untouched for any alpha") {
    GaussianSpec spec;
    Plane c(16, 16, 200.25f);
    for (double a : {-2.0, -0.5, 1.0, 3.0}) {
        const Plane out = usm_filter(c, a, spec);
        CHECK(out.data == c.data);
    }
}

TEST_CASE("usm on a step edge matches the oracle composition") {
    GaussianSpec spec{1.0, 5, Boundary::Reflect};
    Plane x(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int xx = 0; xx < 16; ++xx) x.at(xx, y) = xx < 8 ? 32.0f : 224.0f;
    const Plane out = usm_filter(x, 1.0, spec);
    const auto ref = oracle::usm2d(x, 1.0, spec);
    for (size_t i = 0; i < out.data.size(); ++i)
        CHECK(out.data[i] == doctest::Approx(ref[i]).epsilon(1e-6));
}

TEST_CASE("highfreq mask of a constant frame is exactly zero") {
    GaussianSpec spec;
    for (PixLayout layout : {PixLayout::GRAY, PixLayout::YUV444}) {
        Frame f = make_frame(layout, 12, 10, 77.0f);
        const Plane mask = highfreq_mask(f, spec);
        CHECK(mask.width == 12);
        CHECK(mask.height == 10);
        for (float v : mask.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("highfreq mask equals gray minus oracle lowpass") {
    Rng rng(7);
    GaussianSpec spec{1.0, 5, Boundary::Reflect};
    Frame f;
    f.layout = PixLayout::GRAY;
    f.planes.push_back(oracle::random_plane(24, 18, rng));
    const Plane mask = highfreq_mask(f, spec);
    const auto low = oracle::gaussian2d(f.planes[0], spec);
    for (size_t i = 0; i < mask.data.size(); ++i)
        CHECK(mask.data[i] ==
              doctest::Approx(static_cast<double>(f.planes[0].data[i]) - low[i]).epsilon(5e-5));
}

TEST_CASE("mask is invariant to adding a constant") {
    Rng rng(11);
    GaussianSpec spec;
    Frame f;
    f.layout = PixLayout::GRAY;
    f.planes.push_back(oracle::random_plane(20, 20, rng, 0, 100));
    const Plane m1 = highfreq_mask(f, spec);
    for (auto& v : f.planes[0].data) v += 50.0f;
    const Plane m2 = highfreq_mask(f, spec);
    for (size_t i = 0; i < m1.data.size(); ++i)
        CHECK(std::abs(m2.data[i] - m1.data[i]) <= 1e-4);
}

TEST_CASE("mask sum is ~0 under wrap boundary") {
    Rng rng(13);
    GaussianSpec spec{1.0, 5, Boundary::Wrap};
    Frame f;
    f.layout = PixLayout::GRAY;
    f.planes.push_back(oracle::random_plane(32, 32, rng));
    const Plane mask = highfreq_mask(f, spec);
    double sum = 0.0;
    for (float v : mask.data) sum += v;
    CHECK(std::abs(sum) <= 1e-3 * static_cast<double>(mask.data.size()));
}

TEST_CASE("usm is linear in alpha within float tolerance") {
    Rng rng(17);
    GaussianSpec spec;
    for (int trial = 0; trial < 20; ++trial) {
        const Plane x = oracle::random_plane(24, 24, rng);
        const double a1 = rng.uniform(-1.0, 1.5);
        const double a2 = rng.uniform(-1.0, 1.5);
        const Plane u1 = usm_filter(x, a1, spec);
        const Plane u2 = usm_filter(x, a2, spec);
        const Plane u12 = usm_filter(x, a1 + a2, spec);
        for (size_t i = 0; i < x.data.size(); ++i) {
            const double combined = static_cast<double>(u1.data[i]) +
                                    static_cast<double>(u2.data[i]) -
                                    static_cast<double>(x.data[i]);
            CHECK(std::abs(combined - static_cast<double>(u12.data[i])) <= 1e-4);
        }
    }
}

TEST_CASE("usm commutes with adding a constant plane") {
    Rng rng(19);
    GaussianSpec spec;
    const Plane x = oracle::random_plane(16, 16, rng, 0, 200);
    Plane xc = x;
    for (auto& v : xc.data) v += 30.0f;
    const Plane a = usm_filter(xc, 1.5, spec);
    const Plane b = usm_filter(x, 1.5, spec);
    for (size_t i = 0; i < x.data.size(); ++i)
        CHECK(std::abs(static_cast<double>(a.data[i]) -
                       (static_cast<double>(b.data[i]) + 30.0)) <= 1e-4);
}

TEST_CASE("frequency-gain law holds per DFT bin under wrap") {
    Rng rng(23);
    GaussianSpec spec{1.0, 5, Boundary::Wrap};
    const auto kernel = gaussian_kernel(spec);
    const int n = 32;
    const Plane x = oracle::random_plane(n, n, rng);
    const auto X = dft2d(x);
    for (double alpha : {-1.0, 0.7}) {
        const Plane y = usm_filter(x, alpha, spec);
        const auto Y = dft2d(y);
        for (int v = 0; v < n; ++v)
            for (int u = 0; u < n; ++u) {
                const double gain = 1.0 + alpha * (1.0 - oracle::kernel_transfer(kernel, u, n) *
                                                             oracle::kernel_transfer(kernel, v, n));
                const double measured = std::abs(Y[static_cast<size_t>(v) * n + u]);
                const double expected = std::abs(gain) * std::abs(X[static_cast<size_t>(v) * n + u]);
                CHECK(measured ==
                      doctest::Approx(expected).epsilon(1e-3).scale(std::abs(X[0]) * 1e-9));
            }
    }
}

TEST_CASE("preprocessor registry and chroma passthrough") {
    GaussianSpec spec;
    auto pre = make_preprocessor("usm", spec);
    CHECK(pre->name() == "usm");
    CHECK_THROWS_AS(make_preprocessor("laplace", spec), InvalidArgument);

    PlanarVideo v;
    v.width = 8;
    v.height = 8;
    v.pix_layout = PixLayout::YUV420;
    Rng rng(29);
    for (int f = 0; f < 2; ++f) {
        Frame frame = make_frame(PixLayout::YUV420, 8, 8);
        for (auto& pl : frame.planes)
            for (auto& s : pl.data) s = static_cast<float>(rng.uniform(0, 255));
        v.frames.push_back(std::move(frame));
    }
    const PlanarVideo out = preprocess_video(v, *pre, 1.0);
    for (int f = 0; f < 2; ++f) {
        CHECK(out.frames[static_cast<size_t>(f)].planes[1].data ==
              v.frames[static_cast<size_t>(f)].planes[1].data);
        CHECK(out.frames[static_cast<size_t>(f)].planes[2].data ==
              v.frames[static_cast<size_t>(f)].planes[2].data);
        CHECK(out.frames[static_cast<size_t>(f)].planes[0].data !=
              v.frames[static_cast<size_t>(f)].planes[0].data);
    }
}
