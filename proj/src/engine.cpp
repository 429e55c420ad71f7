#include "shiftlab/engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shiftlab {

namespace {

Vec batch_mean_grad(const Vec& theta, const Batch& batch, ProblemKind kind) {
    Vec mean = zeros(static_cast<int>(theta.size()));
    for (int k = 0; k < batch.size(); ++k) {
        const Vec g = sample_grad(kind, theta, batch.x[static_cast<std::size_t>(k)],
                                  batch.y[static_cast<std::size_t>(k)]);
        axpy(1.0, g, mean);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& v : mean) v *= inv;
    return mean;
}

double batch_mean_loss(const Vec& theta, const Batch& batch, ProblemKind kind) {
    double s = 0.0;
    for (int k = 0; k < batch.size(); ++k) {
        s += sample_loss(kind, theta, batch.x[static_cast<std::size_t>(k)],
                         batch.y[static_cast<std::size_t>(k)]);
    }
    return s / static_cast<double>(batch.size());
}

}  // namespace

Vec sgd_step(const Vec& theta, const Batch& batch, double eta, ProblemKind kind,
             const ProjectionSet& set) {
    if (eta < 0.0) throw std::invalid_argument("sgd_step: eta must be >= 0");
    if (batch.size() < 1) throw std::invalid_argument("sgd_step: empty batch");
    const Vec grad = batch_mean_grad(theta, batch, kind);
    if (!all_finite(grad)) throw DivergenceError("sgd_step: non-finite batch gradient");
    Vec next = theta;
    axpy(-eta, grad, next);
    return project_ball(next, set);
}

double regret_linear_exact(const Vec& theta, const Vec& theta_star) {
    check_same_dim(theta, theta_star);
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = theta[i] - theta_star[i];
        s += d * d;
    }
    return 0.5 * s;
}

double regret_mc(const Vec& theta, const Vec& theta_star, const ProblemSpec& problem,
                 int n_val, Rng& rng) {
    if (n_val < 1) throw std::invalid_argument("regret_mc: n_val must be >= 1");
    double s = 0.0;
    for (int i = 0; i < n_val; ++i) {
        Batch b = problem.kind == ProblemKind::logistic
                      ? sample_logistic_batch(theta_star, 1, problem.noise_sigma, rng,
                                              problem.covariates)
                      : sample_linear_batch(theta_star, 1, problem.noise_sigma, rng,
                                            problem.covariates);
        s += sample_loss(problem.kind, theta, b.x[0], b.y[0]) -
             sample_loss(problem.kind, theta_star, b.x[0], b.y[0]);
    }
    return s / static_cast<double>(n_val);
}

double regret_gradnorm(const Vec& theta, const Vec& theta_star, double lambda) {
    const auto [loss, grad] = nonconvex_loss_and_grad(theta, theta_star, lambda);
    (void)loss;
    return squared_norm(grad);
}

double estimate_sigma(const std::vector<Vec>& per_sample_grads) {
    const int n = static_cast<int>(per_sample_grads.size());
    if (n < 2) throw std::invalid_argument("estimate_sigma: needs at least two samples");
    const int d = static_cast<int>(per_sample_grads.front().size());
    Vec mean = zeros(d);
    for (const auto& g : per_sample_grads) axpy(1.0, g, mean);
    for (auto& v : mean) v /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& g : per_sample_grads) {
        for (int i = 0; i < d; ++i) {
            const double dev = g[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)];
            ss += dev * dev;
        }
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

RunTrace run_online(const ExperimentConfig& config, Scheduler& scheduler) {
    if (config.horizon < 1) throw std::invalid_argument("run_online: T must be >= 1");
    if (config.path.horizon() < 1) throw std::invalid_argument("run_online: empty oracle path");
    if (config.path.dim() != config.d)
        throw std::invalid_argument("run_online: path dimension does not match d");

    Rng rng_data(mix_seed(config.seed, 0));
    Rng rng_val(mix_seed(config.seed, 1));

    const ProblemSpec& problem = config.problem;
    const bool nonconvex = problem.kind == ProblemKind::nonconvex;

    // Shift magnitudes gamma_t: model distance for convex problems, the
    // analytic loss-gap bound for the synthetic non-convex problem.
    auto shift_at = [&](int t) -> double {
        if (t < 1 || t >= config.path.horizon()) return 0.0;
        if (nonconvex) {
            return nonconvex_gamma_bound(config.path.at(t), config.path.at(t + 1),
                                         problem.nonconvex_lambda, config.projection);
        }
        return distance(config.path.at(t), config.path.at(t + 1));
    };

    Vec theta = config.theta0.empty() ? zeros(config.d) : config.theta0;
    if (static_cast<int>(theta.size()) != config.d)
        throw std::invalid_argument("run_online: theta0 dimension does not match d");
    theta = project_ball(theta, config.projection);

    RunTrace trace;
    if (config.capture_iterates) trace.iterates.push_back(theta);
    double gamma_hat = 0.0;

    for (int t = 1; t <= config.horizon; ++t) {
        const Vec& star = config.path.at(t);
        const Vec& star_next = config.path.at(t + 1);
        const int B = config.batch_at(t);
        if (B < 1) throw std::invalid_argument("run_online: batch size must be >= 1");

        ScheduleQuery query;
        query.t = t;
        query.batch_size = B;
        query.gamma_prev = config.revealed_gamma ? shift_at(t - 1) : gamma_hat;
        if (nonconvex) {
            query.loss_est = nonconvex_loss_and_grad(theta, star, problem.nonconvex_lambda).first;
        } else if (!trace.records.empty()) {
            query.loss_est = trace.records.back().loss_est;
        }

        const double eta = scheduler.next_eta(query);
        if (!std::isfinite(eta) || eta < 0.0) {
            throw DivergenceError("run_online: scheduler emitted invalid step size " +
                                  std::to_string(eta) + " at t=" + std::to_string(t));
        }

        Batch batch = nonconvex
                          ? sample_nonconvex_gradients(theta, star, problem.nonconvex_lambda,
                                                       B, problem.noise_sigma, rng_data)
                          : (problem.kind == ProblemKind::logistic
                                 ? sample_logistic_batch(star, B, problem.noise_sigma,
                                                         rng_data, problem.covariates)
                                 : sample_linear_batch(star, B, problem.noise_sigma,
                                                       rng_data, problem.covariates));

        StepRecord rec;
        rec.t = t;
        rec.eta = eta;
        rec.batch_size = B;
        rec.dist = distance(theta, star);
        rec.gamma = shift_at(t);
        rec.gamma_hat = gamma_hat;
        switch (problem.kind) {
            case ProblemKind::linear:
                rec.regret = regret_linear_exact(theta, star);
                rec.loss_est = batch_mean_loss(theta, batch, problem.kind);
                break;
            case ProblemKind::logistic:
                rec.regret = regret_mc(theta, star, problem, config.n_validation, rng_val);
                rec.loss_est = batch_mean_loss(theta, batch, problem.kind);
                break;
            case ProblemKind::nonconvex:
                rec.regret = regret_gradnorm(theta, star, problem.nonconvex_lambda);
                rec.loss_est = query.loss_est;  // exact expected loss
                break;
        }

        // Update, tracking whether the projection was active.
        const Vec grad = batch_mean_grad(theta, batch, problem.kind);
        if (!all_finite(grad)) {
            throw DivergenceError("run_online: non-finite batch gradient at t=" +
                                  std::to_string(t));
        }
        Vec unprojected = theta;
        axpy(-eta, grad, unprojected);
        if (!all_finite(unprojected)) {
            throw DivergenceError("run_online: non-finite iterate at t=" + std::to_string(t));
        }
        Vec theta_next = project_ball(unprojected, config.projection);
        if (distance(unprojected, config.projection.center) > config.projection.radius) {
            ++trace.projection_bind_count;
        }

        rec.inner_shift = dot(sub(star, star_next), sub(theta_next, star));
        rec.dist_next = distance(theta_next, star_next);
        ledger_append(trace, rec);

        gamma_hat = ema_gamma(gamma_hat, distance(theta_next, theta), config.ema_beta);
        theta = std::move(theta_next);
        if (config.capture_iterates) trace.iterates.push_back(theta);
    }
    return trace;
}

double resolve_v0(const ExperimentConfig& config) {
    if (!config.revealed_gamma) return 1.0;
    const Vec theta0 = config.theta0.empty() ? zeros(config.d) : config.theta0;
    return squared_norm(sub(theta0, config.path.at(1)));
}

RunTrace run_online(const ExperimentConfig& config) {
    SchedulerSpec spec = config.scheduler;
    if (spec.v0_auto) spec.params.v0 = resolve_v0(config);
    auto scheduler = make_scheduler(spec);
    return run_online(config, *scheduler);
}

}  // namespace shiftlab
