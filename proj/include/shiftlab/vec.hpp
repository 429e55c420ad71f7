#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace shiftlab {

// Dense model-weight vector. Dimension is fixed within a run.
using Vec = std::vector<double>;

inline void check_same_dim(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    }
}

inline double dot(const Vec& a, const Vec& b) {
    check_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const Vec& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(squared_norm(a)); }

inline double distance(const Vec& a, const Vec& b) {
    check_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec sub(const Vec& a, const Vec& b) {
    check_same_dim(a, b);
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    check_same_dim(a, b);
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scaled(const Vec& a, double c) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

// y += c * x
inline void axpy(double c, const Vec& x, Vec& y) {
    check_same_dim(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline bool all_finite(const Vec& a) {
    for (double x : a) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline Vec zeros(int d) { return Vec(static_cast<std::size_t>(d), 0.0); }

}  // namespace shiftlab
