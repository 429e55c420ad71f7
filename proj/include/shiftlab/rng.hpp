#pragma once

#include <cstdint>
#include <random>

#include "shiftlab/vec.hpp"

namespace shiftlab {

// All randomness flows through an explicitly seeded generator owned by the
// caller; there is no hidden global state.
using Rng = std::mt19937_64;

// splitmix64 step, used to derive independent sub-streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double std_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

inline Vec gaussian_vec(int d, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec v(static_cast<std::size_t>(d));
    for (auto& x : v) x = n(rng);
    return v;
}

// Uniform direction on the unit sphere (normalized Gaussian).
inline Vec unit_sphere(int d, Rng& rng) {
    for (;;) {
        Vec v = gaussian_vec(d, rng);
        const double n = norm(v);
        if (n > 1e-12) {
            for (auto& x : v) x /= n;
            return v;
        }
    }
}

}  // namespace shiftlab
