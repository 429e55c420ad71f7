#pragma once

#include <utility>
#include <vector>

#include "shiftlab/core.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/vec.hpp"

namespace shiftlab {

enum class ProblemKind { linear, logistic, nonconvex };

enum class CovariateKind {
    gaussian,  // x ~ N(0, I)
    unit,      // deterministic all-ones covariate (testing aid)
};

struct ProblemSpec {
    ProblemKind kind = ProblemKind::linear;
    double noise_sigma = 0.1;      // response / gradient noise scale
    double nonconvex_lambda = 0.05;  // ripple amplitude (nonconvex only)
    CovariateKind covariates = CovariateKind::gaussian;

    // Smoothness constant of the expected loss.
    double smoothness() const;
};

// One step's sampled batch. For the synthetic non-convex problem the rows of
// x hold per-sample stochastic gradients instead of covariates.
struct Batch {
    std::vector<Vec> x;
    std::vector<double> y;

    int size() const { return static_cast<int>(x.size()); }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// y = <x, theta*> + eps, eps ~ N(0, sigma^2), x ~ N(0, I).
Batch sample_linear_batch(const Vec& theta_star, int B, double sigma, Rng& rng,
                          CovariateKind cov = CovariateKind::gaussian);

// Soft targets y = sigmoid(<x, theta*> + eps) in (0,1).
Batch sample_logistic_batch(const Vec& theta_star, int B, double sigma, Rng& rng,
                            CovariateKind cov = CovariateKind::gaussian);

// Expected loss and gradient of the synthetic non-convex family
//   l(theta) = 1/2 ||theta - theta*||^2 + lambda * sum_i (1 - cos(2 pi (theta_i - theta*_i))).
// Global minimum 0 at theta*, smooth with constant 1 + 4 pi^2 lambda.
std::pair<double, Vec> nonconvex_loss_and_grad(const Vec& theta, const Vec& theta_star,
                                               double lambda);

// Per-sample stochastic gradients for the non-convex problem: exact gradient
// plus N(0, sigma^2/d * I) noise per sample, packed as batch rows.
Batch sample_nonconvex_gradients(const Vec& theta, const Vec& theta_star, double lambda,
                                 int B, double sigma, Rng& rng);

// Analytic upper bound on sup_{theta in set} |l_t(theta) - l_{t+1}(theta)|
// for the synthetic non-convex family, with a = theta*_t, b = theta*_{t+1}:
//   2 R_eff ||a-b|| + 1/2 | ||a||^2 - ||b||^2 | + 2 pi lambda sqrt(d) ||a-b||,
// R_eff = radius + ||center||.
double nonconvex_gamma_bound(const Vec& theta_star_t, const Vec& theta_star_next,
                             double lambda, const ProjectionSet& set);

// Per-sample loss and gradient of the configured loss at a data point.
double sample_loss(ProblemKind kind, const Vec& theta, const Vec& x, double y);
Vec sample_grad(ProblemKind kind, const Vec& theta, const Vec& x, double y);

}  // namespace shiftlab
