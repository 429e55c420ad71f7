#include "shiftlab/schedulers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftlab {

namespace {

void check_params(const ScheduleParams& p) {
    if (!(p.kappa > 0.0 && p.kappa <= 1.0))
        throw std::invalid_argument("schedule: kappa must be in (0, 1]");
    if (!(p.epsilon > 0.0)) throw std::invalid_argument("schedule: epsilon must be > 0");
    if (!(p.beta > 0.0 && p.beta < 1.0))
        throw std::invalid_argument("schedule: beta must be in (0, 1)");
    if (p.v0 < 0.0) throw std::invalid_argument("schedule: v0 must be >= 0");
    if (p.d < 1) throw std::invalid_argument("schedule: d must be >= 1");
}

// Numerically stable sqrt(x^2 + y) - x for x, y >= 0.
double sqrt_shift_minus(double x, double y) {
    return y / (std::sqrt(x * x + y) + x);
}

}  // namespace

double optimal_zeta(double v, double nu, int d, double sigma) {
    if (!(nu > 0.0)) throw std::invalid_argument("optimal_zeta: nu must be > 0");
    if (v < 0.0) throw std::invalid_argument("optimal_zeta: v must be >= 0");
    const double denom = (d + 1) * v + sigma * sigma * d;
    if (denom <= 0.0) return v > 0.0 ? 1.0 : 0.0;
    return std::min(1.0, nu * v / denom);
}

double alg1_step(ScheduleState& state, int batch_size, double gamma_prev) {
    if (batch_size < 1) throw std::invalid_argument("alg1_step: batch size must be >= 1");
    if (gamma_prev < 0.0) throw std::invalid_argument("alg1_step: gamma must be >= 0");
    const ScheduleParams& p = state.params;
    check_params(p);

    const double B = static_cast<double>(batch_size);
    const double sigma2d = p.sigma * p.sigma * p.d;
    const int substeps = static_cast<int>(std::ceil(1.0 / p.kappa));

    double v = state.v;
    for (int j = 0; j < substeps; ++j) {
        const double denom = (p.d + 1) * v + sigma2d;
        const double r = denom > 0.0 ? std::min(v * B / denom, p.epsilon) : 0.0;
        v += p.kappa * ((p.d + 1) / B * r * r - 2.0 * r) * v +
             p.kappa * (sigma2d / B) * r * r + 2.0 * p.kappa * gamma_prev * std::sqrt(v);
        if (v < 0.0) v = 0.0;
    }
    state.v = v;

    const double denom = (p.d + 1) * v + sigma2d;
    const double eta = denom > 0.0 ? std::min(v * B / denom, p.epsilon) : 0.0;
    state.eta_prev = eta;
    return eta;
}

NoShiftSolution noshift_closed_form(double v0, double a, double b, double tau) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("noshift_closed_form: requires 0 < a < 1");
    if (!(b > 0.0)) throw std::invalid_argument("noshift_closed_form: requires b > 0");
    if (!(v0 > 0.0)) throw std::invalid_argument("noshift_closed_form: requires v0 > 0");

    NoShiftSolution sol;
    const double arg = (1.0 - a) * (v0 * (2.0 - a) / b - 1.0);
    sol.tau_star = arg > 1.0 ? std::log(arg) / (2.0 - a) : 0.0;
    if (sol.tau_star > 0.0) {
        sol.c = a * std::log((1.0 - a) / b) + 1.0 - a - sol.tau_star;
    } else {
        // v0 already below the switching level: fix C by continuity at tau = 0.
        sol.c = a * std::log(1.0 / v0) + b / v0;
    }

    if (tau <= sol.tau_star) {
        const double v_inf = b / (2.0 - a);
        sol.v = (v0 - v_inf) * std::exp(-(2.0 - a) * tau) + v_inf;
        return sol;
    }

    // Phase 2: a*ln(1/v) + b/v = tau + C, strictly decreasing in v.
    const double target = tau + sol.c;
    auto g = [&](double v) { return -a * std::log(v) + b / v; };
    double hi = sol.tau_star > 0.0 ? b / (1.0 - a) : v0;
    double lo = hi;
    while (g(lo) < target) lo *= 0.5;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if ((hi - lo) <= 1e-15 * hi) break;
    }
    sol.v = 0.5 * (lo + hi);
    return sol;
}

std::pair<double, double> convex_thresholds(double gamma, int batch_size, double sigma,
                                            double smooth_l, double d_max) {
    if (batch_size < 1) throw std::invalid_argument("convex_thresholds: B must be >= 1");
    if (!(sigma > 0.0))
        throw std::invalid_argument("convex_thresholds: sigma must be > 0 (noiseless regime unsupported)");
    if (!(smooth_l > 0.0)) throw std::invalid_argument("convex_thresholds: L must be > 0");
    if (!(d_max > 0.0)) throw std::invalid_argument("convex_thresholds: D_max must be > 0");
    if (gamma < 0.0) throw std::invalid_argument("convex_thresholds: gamma must be >= 0");

    const double B = static_cast<double>(batch_size);
    const double sigma2 = sigma * sigma;
    auto tau_of = [&](double b) {
        if (b <= 0.0) return 0.0;
        // B/(2 sigma^2) * (sqrt(b^2 L^2 + 4 sigma^2 b / B) - b L), in stable form.
        return B / (2.0 * sigma2) * sqrt_shift_minus(b * smooth_l, 4.0 * sigma2 * b / B);
    };
    const double b1 = gamma * gamma + 2.0 * d_max * gamma;
    const double b2 = (gamma + d_max) * (gamma + d_max);
    return {tau_of(b1), tau_of(b2)};
}

double convex_step(double eta_prev, double tau1, double tau2) {
    if (!(tau1 <= tau2)) throw std::invalid_argument("convex_step: requires tau1 <= tau2");
    return std::clamp(eta_prev, tau1, tau2);
}

double nonconvex_step(double gamma, double loss_est, int batch_size, double sigma,
                      double smooth_l) {
    if (batch_size < 1) throw std::invalid_argument("nonconvex_step: B must be >= 1");
    if (!(sigma > 0.0))
        throw std::invalid_argument("nonconvex_step: sigma must be > 0 (noiseless regime unsupported)");
    if (!(smooth_l > 0.0)) throw std::invalid_argument("nonconvex_step: L must be > 0");
    if (gamma < 0.0 || loss_est < 0.0)
        throw std::invalid_argument("nonconvex_step: gamma and loss_est must be >= 0");

    const double B = static_cast<double>(batch_size);
    const double sigma2 = sigma * sigma;
    const double b = smooth_l * (gamma + loss_est);
    if (b <= 0.0) return 0.0;
    return B / (smooth_l * sigma2) * sqrt_shift_minus(b, 2.0 * sigma2 * b / B);
}

double ema_gamma(double gamma_hat_prev, double drift, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("ema_gamma: beta must be in (0,1)");
    if (drift < 0.0) throw std::invalid_argument("ema_gamma: drift must be >= 0");
    return beta * gamma_hat_prev + (1.0 - beta) * drift;
}

// ---------------------------------------------------------------------------

ConstantSchedule::ConstantSchedule(double eta) : eta_(eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("constant schedule: eta must be > 0");
}

InverseTimeSchedule::InverseTimeSchedule(double c0, double c1) : c0_(c0), c1_(c1) {
    if (!(c0 > 0.0)) throw std::invalid_argument("inverse_time schedule: c0 must be > 0");
    if (c1 < 0.0) throw std::invalid_argument("inverse_time schedule: c1 must be >= 0");
}

double InverseTimeSchedule::next_eta(const ScheduleQuery& q) {
    return c0_ / (1.0 + c1_ * static_cast<double>(q.t));
}

Alg1Schedule::Alg1Schedule(const ScheduleParams& params) {
    state_.params = params;
    check_params(params);
    state_.v = params.v0;
}

double Alg1Schedule::next_eta(const ScheduleQuery& q) {
    return alg1_step(state_, q.batch_size, q.gamma_prev);
}

std::vector<std::pair<std::string, double>> Alg1Schedule::internals() const {
    return {{"v", state_.v}};
}

ConvexSchedule::ConvexSchedule(const ScheduleParams& params) {
    state_.params = params;
    if (!(params.sigma > 0.0))
        throw std::invalid_argument("convex schedule: sigma must be > 0");
    if (!(params.smooth_l > 0.0) || !(params.d_max > 0.0))
        throw std::invalid_argument("convex schedule: L and D_max must be > 0");
}

double ConvexSchedule::next_eta(const ScheduleQuery& q) {
    const ScheduleParams& p = state_.params;
    if (state_.eta_prev < 0.0) {
        // No eta_0 exists; start at the no-shift optimum tau2(gamma = 0).
        state_.eta_prev =
            convex_thresholds(0.0, q.batch_size, p.sigma, p.smooth_l, p.d_max).second;
    }
    const auto [tau1, tau2] =
        convex_thresholds(q.gamma_prev, q.batch_size, p.sigma, p.smooth_l, p.d_max);
    last_tau1_ = tau1;
    last_tau2_ = tau2;
    state_.eta_prev = convex_step(state_.eta_prev, tau1, tau2);
    return state_.eta_prev;
}

std::vector<std::pair<std::string, double>> ConvexSchedule::internals() const {
    return {{"tau1", last_tau1_}, {"tau2", last_tau2_}};
}

NonconvexSchedule::NonconvexSchedule(const ScheduleParams& params) : params_(params) {
    if (!(params.sigma > 0.0))
        throw std::invalid_argument("nonconvex schedule: sigma must be > 0");
    if (!(params.smooth_l > 0.0))
        throw std::invalid_argument("nonconvex schedule: L must be > 0");
}

double NonconvexSchedule::next_eta(const ScheduleQuery& q) {
    return nonconvex_step(q.gamma_prev, std::max(q.loss_est, 0.0), q.batch_size,
                          params_.sigma, params_.smooth_l);
}

std::unique_ptr<Scheduler> make_scheduler(const SchedulerSpec& spec) {
    if (spec.kind == "constant") return std::make_unique<ConstantSchedule>(spec.eta);
    if (spec.kind == "inverse_time")
        return std::make_unique<InverseTimeSchedule>(spec.c0, spec.c1);
    if (spec.kind == "alg1") return std::make_unique<Alg1Schedule>(spec.params);
    if (spec.kind == "convex") return std::make_unique<ConvexSchedule>(spec.params);
    if (spec.kind == "nonconvex") return std::make_unique<NonconvexSchedule>(spec.params);
    throw std::invalid_argument("unknown scheduler kind: " + spec.kind);
}

}  // namespace shiftlab
