#include "shiftlab/datagen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shiftlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec draw_covariate(int d, CovariateKind cov, Rng& rng) {
    if (cov == CovariateKind::unit) return Vec(static_cast<std::size_t>(d), 1.0);
    return gaussian_vec(d, rng);
}

}  // namespace

double ProblemSpec::smoothness() const {
    switch (kind) {
        case ProblemKind::linear:
            return 1.0;  // expected Hessian of the squared loss is the identity
        case ProblemKind::logistic:
            return 0.25;
        case ProblemKind::nonconvex:
            return 1.0 + 4.0 * std::numbers::pi * std::numbers::pi * nonconvex_lambda;
    }
    return 1.0;
}

Batch sample_linear_batch(const Vec& theta_star, int B, double sigma, Rng& rng,
                          CovariateKind cov) {
    if (B < 1) throw std::invalid_argument("sample_linear_batch: B must be >= 1");
    const int d = static_cast<int>(theta_star.size());
    std::normal_distribution<double> noise(0.0, 1.0);
    Batch batch;
    batch.x.reserve(static_cast<std::size_t>(B));
    batch.y.reserve(static_cast<std::size_t>(B));
    for (int k = 0; k < B; ++k) {
        Vec x = draw_covariate(d, cov, rng);
        const double eps = sigma > 0.0 ? sigma * noise(rng) : 0.0;
        batch.y.push_back(dot(x, theta_star) + eps);
        batch.x.push_back(std::move(x));
    }
    return batch;
}

Batch sample_logistic_batch(const Vec& theta_star, int B, double sigma, Rng& rng,
                            CovariateKind cov) {
    if (B < 1) throw std::invalid_argument("sample_logistic_batch: B must be >= 1");
    const int d = static_cast<int>(theta_star.size());
    std::normal_distribution<double> noise(0.0, 1.0);
    Batch batch;
    batch.x.reserve(static_cast<std::size_t>(B));
    batch.y.reserve(static_cast<std::size_t>(B));
    for (int k = 0; k < B; ++k) {
        Vec x = draw_covariate(d, cov, rng);
        const double eps = sigma > 0.0 ? sigma * noise(rng) : 0.0;
        batch.y.push_back(sigmoid(dot(x, theta_star) + eps));
        batch.x.push_back(std::move(x));
    }
    return batch;
}

std::pair<double, Vec> nonconvex_loss_and_grad(const Vec& theta, const Vec& theta_star,
                                               double lambda) {
    check_same_dim(theta, theta_star);
    if (lambda < 0.0) throw std::invalid_argument("nonconvex_loss_and_grad: lambda must be >= 0");
    double loss = 0.0;
    Vec grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double u = theta[i] - theta_star[i];
        loss += 0.5 * u * u + lambda * (1.0 - std::cos(kTwoPi * u));
        grad[i] = u + lambda * kTwoPi * std::sin(kTwoPi * u);
    }
    return {loss, grad};
}

Batch sample_nonconvex_gradients(const Vec& theta, const Vec& theta_star, double lambda,
                                 int B, double sigma, Rng& rng) {
    if (B < 1) throw std::invalid_argument("sample_nonconvex_gradients: B must be >= 1");
    const int d = static_cast<int>(theta.size());
    const auto [loss, grad] = nonconvex_loss_and_grad(theta, theta_star, lambda);
    (void)loss;
    const double noise_scale = sigma / std::sqrt(static_cast<double>(d));
    std::normal_distribution<double> noise(0.0, 1.0);
    Batch batch;
    batch.x.reserve(static_cast<std::size_t>(B));
    batch.y.assign(static_cast<std::size_t>(B), 0.0);
    for (int k = 0; k < B; ++k) {
        Vec g = grad;
        if (noise_scale > 0.0) {
            for (auto& gi : g) gi += noise_scale * noise(rng);
        }
        batch.x.push_back(std::move(g));
    }
    return batch;
}

double nonconvex_gamma_bound(const Vec& theta_star_t, const Vec& theta_star_next,
                             double lambda, const ProjectionSet& set) {
    check_same_dim(theta_star_t, theta_star_next);
    const double shift = distance(theta_star_t, theta_star_next);
    const double r_eff = set.radius + norm(set.center);
    const double sq_gap =
        0.5 * std::abs(squared_norm(theta_star_t) - squared_norm(theta_star_next));
    const double d = static_cast<double>(theta_star_t.size());
    return 2.0 * r_eff * shift + sq_gap + kTwoPi * lambda * std::sqrt(d) * shift;
}

double sample_loss(ProblemKind kind, const Vec& theta, const Vec& x, double y) {
    switch (kind) {
        case ProblemKind::linear: {
            const double r = y - dot(x, theta);
            return 0.5 * r * r;
        }
        case ProblemKind::logistic: {
            const double p = sigmoid(dot(x, theta));
            const double eps = 1e-12;
            const double pc = std::min(std::max(p, eps), 1.0 - eps);
            return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
        }
        case ProblemKind::nonconvex:
            throw std::invalid_argument("sample_loss: nonconvex losses are evaluated analytically");
    }
    return 0.0;
}

Vec sample_grad(ProblemKind kind, const Vec& theta, const Vec& x, double y) {
    switch (kind) {
        case ProblemKind::linear:
            return scaled(x, dot(x, theta) - y);
        case ProblemKind::logistic:
            return scaled(x, sigmoid(dot(x, theta)) - y);
        case ProblemKind::nonconvex:
            return x;  // rows already hold per-sample stochastic gradients
    }
    return {};
}

}  // namespace shiftlab
