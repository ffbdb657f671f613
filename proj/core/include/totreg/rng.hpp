#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace totreg {

/// SplitMix64 finalizer. Used both for seed mixing and for deriving
/// per-replicate seeds from run coordinates (documented in the README).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-replicate seed: fold each run coordinate into the base seed with
/// mix64. Order of coordinates matters; execution order does not.
inline std::uint64_t combine_seed(std::uint64_t base,
                                  std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = base;
    for (std::uint64_t c : coords) h = mix64(h ^ c);
    return h;
}

/// Seedable pseudorandom stream. mt19937_64 gives identical integer output
/// on every platform; normal variates come from Box-Muller on explicit
/// uniforms so the double stream is platform-stable too (up to libm ulps).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(mix64(seed)) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53; // guard log(0)
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t next_u64() { return eng_(); }

    /// Independent child stream keyed by tag; the parent is not advanced.
    Rng split(std::uint64_t tag) const {
        return Rng(combine_seed(seed_, {tag}));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

} // namespace totreg
