#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hfprep/video.hpp"

namespace hfprep {

enum class Boundary { Reflect, Wrap };

// Low-pass Gaussian parameters. The kernel is truncated at ksize taps and
// renormalized so the weights sum to 1.
struct GaussianSpec {
    double sigma = 1.0;
    int ksize = 5;
    Boundary boundary = Boundary::Reflect;
};

// Signed preprocessing strength. Positive sharpens, negative smooths,
// zero is passthrough.
struct StrategyLabel {
    double alpha = 0.0;
};

constexpr double kAlphaMin = -2.0;
constexpr double kAlphaMax = 3.0;

// Throws InvalidArgument on even/undersized ksize or non-positive sigma.
void validate_spec(const GaussianSpec& spec);

// Normalized 1D kernel taps, centered, length spec.ksize.
std::vector<double> gaussian_kernel(const GaussianSpec& spec);

// Separable Gaussian low-pass with double accumulation and a single final
// rounding to float. Requires ksize <= 2*min(width,height)+1.
Plane gaussian_lowpass(const Plane& x, const GaussianSpec& spec);

// High-frequency residual x - lowpass(x), evaluated in difference form
// sum_q K[q]*(x[p]-x[p+q]) so a constant plane yields exact zeros.
// Double accumulation; the caller rounds.
std::vector<double> highfreq_residual(const Plane& x, const GaussianSpec& spec);

// Unsharp masking: alpha*(x - lowpass(x)) + x, unclipped. alpha == 0
// returns the input bitwise.
Plane usm_filter(const Plane& x, double alpha, const GaussianSpec& spec);

// Gray(frame) - lowpass(Gray(frame)); same spatial dimensions as the frame.
Plane highfreq_mask(const Frame& frame, const GaussianSpec& spec);

// Strength-keyed preprocessing filter interface. Only USM ships; other
// high-frequency filters can be registered under new names.
class Preprocessor {
public:
    virtual ~Preprocessor() = default;
    virtual std::string name() const = 0;
    virtual Plane apply(const Plane& luma, double alpha) const = 0;
};

class UsmPreprocessor final : public Preprocessor {
public:
    explicit UsmPreprocessor(GaussianSpec spec) : spec_(spec) {}
    std::string name() const override { return "usm"; }
    Plane apply(const Plane& luma, double alpha) const override {
        return usm_filter(luma, alpha, spec_);
    }

private:
    GaussianSpec spec_;
};

std::unique_ptr<Preprocessor> make_preprocessor(const std::string& name,
                                                const GaussianSpec& spec);

// Applies the preprocessor to the luma plane of every frame; chroma passes
// through untouched.
PlanarVideo preprocess_video(const PlanarVideo& video, const Preprocessor& pre,
                             double alpha);

} // namespace hfprep
