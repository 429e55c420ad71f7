#pragma once

#include <vector>

#include "shiftlab/rng.hpp"
#include "shiftlab/vec.hpp"

namespace shiftlab {

// Oracle model sequence theta*_1..theta*_T (1-based access).
struct OraclePath {
    std::vector<Vec> points;

    int horizon() const { return static_cast<int>(points.size()); }
    int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }

    // 1-based, clamped to the last point so theta*_{T+1} := theta*_T.
    const Vec& at(int t) const {
        if (t < 1) t = 1;
        const int T = horizon();
        if (t > T) t = T;
        return points[static_cast<std::size_t>(t - 1)];
    }
};

// Shift magnitudes gamma_t, 1-based: gammas[t-1] is the shift between steps
// t and t+1.
struct ShiftTrace {
    std::vector<double> gammas;

    int length() const { return static_cast<int>(gammas.size()); }
    // gamma_t, with gamma_0 := 0 and zero past the end.
    double at(int t) const {
        if (t < 1 || t > length()) return 0.0;
        return gammas[static_cast<std::size_t>(t - 1)];
    }
};

// Trigonometric spiral with per-pair frequencies. Component i of theta*_t is
// r(t)^3 * cos(ceil(i/2) * 2*k*pi * alpha(t)) for odd i, sin for even i, with
// r and alpha evenly spaced grids a->b and 0->1 over the T points.
OraclePath spiral_path(int d, int T, double a, double b, int k);

// Piecewise-constant discretization: result_t = path_{ceil(t/l)*l}, clamped
// to the horizon at the tail.
OraclePath downsample_path(const OraclePath& path, int l);

// gamma_t = s at the first step of each episode, 0 elsewhere.
ShiftTrace bursty_gamma(int episode_len, double s, int T);

// gamma_t = 1 / t^alpha.
ShiftTrace smooth_gamma(double alpha, int T);

// A concrete path whose consecutive distances equal the given trace exactly;
// step directions are drawn uniformly on the unit sphere. Output has
// length(gammas)+1 points.
OraclePath realize_path(const ShiftTrace& gammas, int d, const Vec& start, Rng& rng);

// gamma_t = ||theta*_t - theta*_{t+1}||. Length-1 paths give an empty trace.
ShiftTrace gamma_of_path(const OraclePath& path);

}  // namespace shiftlab
