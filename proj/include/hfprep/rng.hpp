#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hfprep {

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the distribution helpers below are hand-rolled because the
// standard distribution objects are implementation-defined and would break
// bit-exact reproducibility across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, n). Rejection sampling on the top bits keeps the
    // result unbiased for any n.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform integer in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 eng_;
};

// SplitMix64 finalizer; the standard 64-bit mixing step.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives a stage seed from the global seed and a textual tag
// (e.g. "clip/<video_id>/<epoch>"). FNV-1a over the tag, then mixed with
// the base seed. This is the single fan-out rule for all run entropy.
inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return mix64(base ^ mix64(h));
}

} // namespace hfprep
