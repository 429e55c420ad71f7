#pragma once

#include <cmath>
#include <random>

#include "shiftlab/rng.hpp"
#include "shiftlab/vec.hpp"

namespace testutil {

inline bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

inline bool rel_close(double a, double b, double rel) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 || std::abs(a - b) <= rel * scale;
}

inline shiftlab::Vec random_vec(int d, shiftlab::Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    shiftlab::Vec v(static_cast<std::size_t>(d));
    for (auto& x : v) x = u(rng);
    return v;
}

inline double uniform(shiftlab::Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng);
}

}  // namespace testutil
