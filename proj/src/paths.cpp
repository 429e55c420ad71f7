#include "shiftlab/paths.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shiftlab {

OraclePath spiral_path(int d, int T, double a, double b, int k) {
    if (d < 2 || d % 2 != 0) throw std::invalid_argument("spiral_path: d must be even and >= 2");
    if (T < 2) throw std::invalid_argument("spiral_path: T must be >= 2");
    if (k < 1) throw std::invalid_argument("spiral_path: k must be >= 1");

    OraclePath path;
    path.points.reserve(static_cast<std::size_t>(T));
    const double two_k_pi = 2.0 * k * std::numbers::pi;
    for (int t = 1; t <= T; ++t) {
        const double frac = static_cast<double>(t - 1) / (T - 1);
        const double r = a + (b - a) * frac;
        const double r3 = r * r * r;
        Vec p(static_cast<std::size_t>(d));
        for (int i = 1; i <= d; ++i) {
            const int pair = (i + 1) / 2;  // ceil(i/2)
            const double phase = pair * two_k_pi * frac;
            p[static_cast<std::size_t>(i - 1)] =
                (i % 2 == 1) ? r3 * std::cos(phase) : r3 * std::sin(phase);
        }
        path.points.push_back(std::move(p));
    }
    return path;
}

OraclePath downsample_path(const OraclePath& path, int l) {
    if (l < 1) throw std::invalid_argument("downsample_path: l must be >= 1");
    const int T = path.horizon();
    OraclePath out;
    out.points.reserve(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        int src = ((t + l - 1) / l) * l;  // ceil(t/l) * l
        if (src > T) src = T;
        out.points.push_back(path.at(src));
    }
    return out;
}

ShiftTrace bursty_gamma(int episode_len, double s, int T) {
    if (episode_len < 1) throw std::invalid_argument("bursty_gamma: episode_len must be >= 1");
    if (s < 0.0) throw std::invalid_argument("bursty_gamma: s must be >= 0");
    ShiftTrace trace;
    trace.gammas.assign(static_cast<std::size_t>(T), 0.0);
    for (int t = 1; t <= T; t += episode_len) {
        trace.gammas[static_cast<std::size_t>(t - 1)] = s;
    }
    return trace;
}

ShiftTrace smooth_gamma(double alpha, int T) {
    if (!(alpha > 0.0)) throw std::invalid_argument("smooth_gamma: alpha must be > 0");
    ShiftTrace trace;
    trace.gammas.resize(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        trace.gammas[static_cast<std::size_t>(t - 1)] = std::pow(static_cast<double>(t), -alpha);
    }
    return trace;
}

OraclePath realize_path(const ShiftTrace& gammas, int d, const Vec& start, Rng& rng) {
    if (d < 1) throw std::invalid_argument("realize_path: d must be >= 1");
    if (static_cast<int>(start.size()) != d) {
        throw std::invalid_argument("realize_path: start dimension does not match d");
    }
    OraclePath path;
    path.points.reserve(gammas.gammas.size() + 1);
    path.points.push_back(start);
    Vec cur = start;
    for (double g : gammas.gammas) {
        Vec dir = unit_sphere(d, rng);
        axpy(g, dir, cur);
        path.points.push_back(cur);
    }
    return path;
}

ShiftTrace gamma_of_path(const OraclePath& path) {
    ShiftTrace trace;
    const int T = path.horizon();
    if (T < 2) return trace;
    trace.gammas.resize(static_cast<std::size_t>(T - 1));
    for (int t = 1; t < T; ++t) {
        trace.gammas[static_cast<std::size_t>(t - 1)] = distance(path.at(t), path.at(t + 1));
    }
    return trace;
}

}  // namespace shiftlab
