#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shiftlab/core.hpp"
#include "shiftlab/datagen.hpp"
#include "shiftlab/paths.hpp"
#include "shiftlab/schedulers.hpp"

namespace shiftlab {

struct ExperimentConfig {
    int d = 2;
    int horizon = 100;  // T
    int batch_size = 1; // constant B_t unless batch_schedule is set
    std::vector<int> batch_schedule;  // optional per-step override, 1-based

    ProblemSpec problem;
    OraclePath path;  // theta*_1..theta*_T; shorter paths are clamped at the tail
    ProjectionSet projection{Vec{0.0, 0.0}, 10.0};
    Vec theta0;       // initial model, defaults to the origin
    std::uint64_t seed = 1;
    int n_validation = 4096;    // Monte Carlo regret sample size (logistic)
    bool revealed_gamma = true; // feed true gamma_{t-1} vs the EMA estimate
    double ema_beta = 0.9;
    bool capture_iterates = false;

    SchedulerSpec scheduler;

    int batch_at(int t) const {
        if (!batch_schedule.empty()) {
            const int idx = t - 1;
            if (idx < 0 || idx >= static_cast<int>(batch_schedule.size()))
                return batch_schedule.back();
            return batch_schedule[static_cast<std::size_t>(idx)];
        }
        return batch_size;
    }
};

// theta' = project(theta - eta * mean_k grad l(theta, z_k)). Aborts on
// non-finite gradients.
Vec sgd_step(const Vec& theta, const Batch& batch, double eta, ProblemKind kind,
             const ProjectionSet& set);

// 1/2 ||theta - theta*||^2 (exact expected regret of the linear model).
double regret_linear_exact(const Vec& theta, const Vec& theta_star);

// Paired-sample Monte Carlo estimate of the expected regret: mean over n_val
// fresh draws of l(theta, z) - l(theta*, z).
double regret_mc(const Vec& theta, const Vec& theta_star, const ProblemSpec& problem,
                 int n_val, Rng& rng);

// ||grad l(theta)||^2 of the synthetic non-convex expected loss.
double regret_gradnorm(const Vec& theta, const Vec& theta_star, double lambda);

// Square root of the unbiased sample variance of per-sample gradients around
// their mean, summed over coordinates. Requires at least two samples.
double estimate_sigma(const std::vector<Vec>& per_sample_grads);

// Runs the online protocol for config.horizon steps with the given schedule.
// Deterministic given (config, seed).
RunTrace run_online(const ExperimentConfig& config, Scheduler& scheduler);

// Convenience overload constructing the scheduler from config.scheduler.
RunTrace run_online(const ExperimentConfig& config);

// Resolves the alg1 v0 when configured as automatic: the initial squared
// tracking error in revealed mode, 1.0 otherwise.
double resolve_v0(const ExperimentConfig& config);

}  // namespace shiftlab
