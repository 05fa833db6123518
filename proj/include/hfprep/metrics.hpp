#pragma once

#include <complex>
#include <vector>

#include "hfprep/video.hpp"

namespace hfprep {

struct PairedScores {
    std::vector<double> predictions;
    std::vector<double> ground_truth;
};

// Pearson linear correlation coefficient, computed in 64-bit two-pass
// form. Throws on length < 2, length mismatch, or a constant sequence.
double plcc(const PairedScores& pairs);

// Root mean square error. Throws on empty or mismatched input.
double rmse(const PairedScores& pairs);

// Full 2D DFT of a plane, row-major (height x width) bins, computed in
// double. X[v*W+u] = sum x[y][x] exp(-2*pi*i*(u*x/W + v*y/H)).
std::vector<std::complex<double>> dft2d(const Plane& plane);

// Sum of squared DFT magnitudes at normalized radial frequencies above
// cutoff_fraction, excluding DC. The radius is normalized so the corner
// of the 2D Nyquist square sits at 1.
double hf_energy(const Plane& plane, double cutoff_fraction);

} // namespace hfprep
