#pragma once

// Deterministic random streams.
//
// Sampling commands must be byte-reproducible across platforms and runs, and
// scan suprema must be monotone in the sample count for a fixed seed.  Both
// requirements rule out std::uniform_real_distribution (implementation-defined
// output) and a single shared engine (sample i would depend on how many samples
// preceded it).  Instead every sample owns a SplitMix64 stream keyed by
// (seed, sample index), and uniforms are produced by the portable top-53-bit
// construction.

#include <cstdint>

#include "jholo/core.hpp"

namespace jholo {

/// SplitMix64: tiny, fast, and fully specified by its algorithm.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller (both uniforms drawn from this stream).
    double next_normal() {
        double u1 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Uniform point in the closed disk of given radius (rejection-free).
    cplx next_in_disk(double radius) {
        const double r = radius * std::sqrt(next_unit());
        const double th = next_in(0.0, 2.0 * kPi);
        return {r * std::cos(th), r * std::sin(th)};
    }

    /// Uniform phase on the unit circle.
    cplx next_phase() {
        const double th = next_in(0.0, 2.0 * kPi);
        return {std::cos(th), std::sin(th)};
    }

    /// Euclidean-uniform direction on the unit sphere of C^2 = R^4.
    C2 next_direction_c2() {
        for (;;) {
            const C2 g{{next_normal(), next_normal()}, {next_normal(), next_normal()}};
            const double n = norm(g);
            if (n > 1e-12) return (1.0 / n) * g;
        }
    }

  private:
    std::uint64_t state_;
};

/// Stream for one sample of a scan: decorrelates the index before mixing so
/// neighbouring samples share no obvious structure.
inline SplitMix64 sample_stream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(seed ^ (0x9e3779b97f4a7c15ULL * (index + 0x51ed2701a2b5f4e5ULL)));
}

}  // namespace jholo
