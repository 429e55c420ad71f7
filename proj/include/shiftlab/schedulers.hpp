#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shiftlab/core.hpp"

namespace shiftlab {

// Hyperparameters shared by the adaptive schedules.
struct ScheduleParams {
    double epsilon = 0.1;  // max step size
    double kappa = 1e-3;   // discretization scale of the inner ODE loop, in (0, 1]
    int d = 1;             // model dimension
    double sigma = 1.0;    // gradient noise scale
    double smooth_l = 1.0; // smoothness constant L
    double strong_mu = 1.0;// strong convexity constant
    double d_max = 1.0;    // diameter of the admissible set
    double beta = 0.9;     // EMA factor for shift estimation
    double v0 = 1.0;       // initial value of the tracking-error state
};

// Mutable per-run scheduler state.
struct ScheduleState {
    double v = 0.0;         // discretized tracking-error second moment
    double eta_prev = -1.0; // previous emitted step size, < 0 when unset
    double gamma_hat = 0.0; // EMA shift estimate
    ScheduleParams params;
};

// Control adjustment factor: min{1, nu*v / ((d+1)v + sigma^2 d)}.
double optimal_zeta(double v, double nu, int d, double sigma);

// One step of the ODE-driven schedule for streaming linear regression.
// Advances the v-state through ceil(1/kappa) scaled substeps holding
// gamma_prev fixed, then emits
//   eta = min(v*B / ((d+1)v + sigma^2 d), epsilon).
// Returns the emitted step size and mutates state.v.
double alg1_step(ScheduleState& state, int batch_size, double gamma_prev);

// Closed-form solution of the no-shift tracking ODE
//   v' = (a*zeta^2 - 2*zeta) v + b*zeta^2, zeta = min(1, v/(a v + b)),
// valid for 0 < a < 1. Phase 1 (tau <= tau_star) is explicit; phase 2 solves
// a*ln(1/v) + b/v = tau + C by bisection.
struct NoShiftSolution {
    double v = 0.0;
    double tau_star = 0.0;
    double c = 0.0;
};
NoShiftSolution noshift_closed_form(double v0, double a, double b, double tau);

// Thresholds of the convex schedule:
//   tau_i = B/(2 sigma^2) * (sqrt(b_i^2 L^2 + 4 sigma^2 b_i / B) - b_i L)
// with b_1 = gamma^2 + 2 D_max gamma and b_2 = (gamma + D_max)^2.
// Guarantees 0 <= tau1 <= tau2 <= 1/L.
std::pair<double, double> convex_thresholds(double gamma, int batch_size, double sigma,
                                            double smooth_l, double d_max);

// eta* = clamp(eta_prev, tau1, tau2).
double convex_step(double eta_prev, double tau1, double tau2);

// Closed-form schedule for the gradient-norm regret:
//   b = L (gamma + loss_est), eta* = B/(L sigma^2) (sqrt(b^2 + 2 sigma^2 b / B) - b),
// always in [0, 1/L].
double nonconvex_step(double gamma, double loss_est, int batch_size, double sigma,
                      double smooth_l);

// gamma_hat_t = beta * gamma_hat_{t-1} + (1 - beta) * drift.
double ema_gamma(double gamma_hat_prev, double drift, double beta);

// ---------------------------------------------------------------------------
// Engine-facing schedule objects. next_eta is queried once per step with only
// history available through the previous step (plus the current batch size).

struct ScheduleQuery {
    int t = 1;
    int batch_size = 1;
    double gamma_prev = 0.0;  // revealed gamma_{t-1} or its EMA estimate
    double loss_est = 0.0;    // expected-loss estimate for the current model
};

class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual double next_eta(const ScheduleQuery& q) = 0;
    virtual std::string name() const = 0;
    // Diagnostic internals for schedule-trace exports.
    virtual std::vector<std::pair<std::string, double>> internals() const { return {}; }
};

class ConstantSchedule final : public Scheduler {
public:
    explicit ConstantSchedule(double eta);
    double next_eta(const ScheduleQuery&) override { return eta_; }
    std::string name() const override { return "constant"; }

private:
    double eta_;
};

class InverseTimeSchedule final : public Scheduler {
public:
    InverseTimeSchedule(double c0, double c1);
    double next_eta(const ScheduleQuery& q) override;
    std::string name() const override { return "inverse_time"; }

private:
    double c0_;
    double c1_;
};

class Alg1Schedule final : public Scheduler {
public:
    explicit Alg1Schedule(const ScheduleParams& params);
    double next_eta(const ScheduleQuery& q) override;
    std::string name() const override { return "alg1"; }
    std::vector<std::pair<std::string, double>> internals() const override;
    double v() const { return state_.v; }

private:
    ScheduleState state_;
};

class ConvexSchedule final : public Scheduler {
public:
    explicit ConvexSchedule(const ScheduleParams& params);
    double next_eta(const ScheduleQuery& q) override;
    std::string name() const override { return "convex"; }
    std::vector<std::pair<std::string, double>> internals() const override;

private:
    ScheduleState state_;
    double last_tau1_ = 0.0;
    double last_tau2_ = 0.0;
};

class NonconvexSchedule final : public Scheduler {
public:
    explicit NonconvexSchedule(const ScheduleParams& params);
    double next_eta(const ScheduleQuery& q) override;
    std::string name() const override { return "nonconvex"; }

private:
    ScheduleParams params_;
};

// Declarative scheduler choice used inside experiment configs.
struct SchedulerSpec {
    std::string kind = "constant";  // constant | inverse_time | alg1 | convex | nonconvex
    double eta = 0.1;               // constant
    double c0 = 1.0, c1 = 0.0;      // inverse_time
    ScheduleParams params;
    bool v0_auto = false;           // alg1: derive v0 from the initial tracking error
};

std::unique_ptr<Scheduler> make_scheduler(const SchedulerSpec& spec);

}  // namespace shiftlab
