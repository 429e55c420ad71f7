#pragma once

#include <functional>
#include <vector>

#include "shiftlab/core.hpp"
#include "shiftlab/engine.hpp"

namespace shiftlab {

// Mean and second-moment trajectories of the continuous error process.
struct MomentTrace {
    std::vector<double> taus;
    std::vector<Vec> m;
    std::vector<double> v;
};

using ScalarFn = std::function<double(double)>;
using VecFn = std::function<Vec(double)>;

// Forward-Euler solution of
//   m' = -zeta m - Y',
//   v' = ((d+1) zeta^2 / nu - 2 zeta) v + zeta^2 sigma^2 d / nu - 2 m.Y'.
// Raises if v dips below -1e-12 (step size too coarse); tiny negative values
// are clamped to zero.
MomentTrace integrate_moments(const ScalarFn& zeta, const ScalarFn& nu, const VecFn& yprime,
                              const Vec& m0, double v0, double dtau, double T, double sigma);

struct VtildeTrace {
    std::vector<double> taus;
    std::vector<double> v;
    std::vector<double> zeta;
};

// Euler solution of the controlled envelope
//   v' = ((d+1) zeta^2 / nu - 2 zeta) v + zeta^2 sigma^2 d / nu + 2 ||Y'|| sqrt(v)
// with zeta chosen by optimal_zeta at every step.
VtildeTrace integrate_vtilde(const ScalarFn& nu, const ScalarFn& ynorm, double v0,
                             double kappa, double T, int d, double sigma);

// Convex regret upper bound, both the oracle form (recorded true quantities)
// and the observable form (D_max majorants).
struct ConvexUpperBound {
    double oracle_form = 0.0;
    double observable_form = 0.0;
    std::vector<double> oracle_increments;
    std::vector<double> observable_increments;
    int eta_violations = 0;  // steps with eta > 1/L
};
ConvexUpperBound bound_upper_convex(const RunTrace& trace, double smooth_l, double sigma,
                                    double d_max);

// Strongly convex regret lower bound with a'_t = 2(eta + (L/mu) eta - eta^2 L).
struct ConvexLowerBound {
    double value = 0.0;
    std::vector<double> increments;
};
ConvexLowerBound bound_lower_convex(const RunTrace& trace, double smooth_l, double strong_mu,
                                    double sigma);

// Gradient-norm regret upper bound
//   2 l_1/a_1 + sum_{t>=2} 2 l_t (1/a_t - 1/a_{t-1}) + sum (L sigma^2 eta^2 / B + 2 gamma)/a_t.
struct NonconvexUpperBound {
    double value = 0.0;
    std::vector<double> increments;
};
NonconvexUpperBound bound_upper_nonconvex(const RunTrace& trace, double smooth_l, double sigma);

// Ensemble Monte Carlo estimate of E[theta_t - theta*_t] and
// E||theta_t - theta*_t||^2 over n_replicas independent runs, on the grid
// tau = epsilon * (t - 1). Linear problems only.
MomentTrace ensemble_moments(const ExperimentConfig& config, int n_replicas, double epsilon,
                             int jobs = 1);

// Monte Carlo check of E[(xx^T - I) uu^T (xx^T - I)^T] = ||u||^2 I + uu^T
// for x ~ N(0, I). Matrices are row-major d*d.
struct SteinCheck {
    std::vector<double> empirical;
    std::vector<double> analytic;
    double max_abs_dev = 0.0;
};
SteinCheck stein_check(const Vec& u, long n, Rng& rng);

}  // namespace shiftlab
