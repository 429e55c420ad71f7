#include "shiftlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "shiftlab/schedulers.hpp"

namespace shiftlab {

namespace {

constexpr double kNegativeVTol = 1e-12;

double guard_v(double v, double tau) {
    if (v < 0.0) {
        if (v < -kNegativeVTol) {
            throw DivergenceError("moment ODE: v went negative (" + std::to_string(v) +
                                  ") at tau=" + std::to_string(tau) +
                                  "; reduce the step size");
        }
        return 0.0;
    }
    return v;
}

double a_upper(double eta, double smooth_l) { return 2.0 * eta - smooth_l * eta * eta; }

}  // namespace

MomentTrace integrate_moments(const ScalarFn& zeta, const ScalarFn& nu, const VecFn& yprime,
                              const Vec& m0, double v0, double dtau, double T, double sigma) {
    if (!(dtau > 0.0)) throw std::invalid_argument("integrate_moments: dtau must be > 0");
    if (v0 < 0.0) throw std::invalid_argument("integrate_moments: v0 must be >= 0");
    const int d = static_cast<int>(m0.size());
    const int steps = static_cast<int>(std::llround(T / dtau));

    MomentTrace trace;
    trace.taus.reserve(static_cast<std::size_t>(steps) + 1);
    trace.m.reserve(static_cast<std::size_t>(steps) + 1);
    trace.v.reserve(static_cast<std::size_t>(steps) + 1);

    Vec m = m0;
    double v = v0;
    trace.taus.push_back(0.0);
    trace.m.push_back(m);
    trace.v.push_back(v);

    for (int i = 0; i < steps; ++i) {
        const double tau = i * dtau;
        const double z = zeta(tau);
        const double n = nu(tau);
        if (!(n > 0.0)) throw std::invalid_argument("integrate_moments: nu must be > 0");
        const Vec yp = yprime(tau);

        const double coef = (d + 1) * z * z / n - 2.0 * z;
        const double dv = coef * v + z * z * sigma * sigma * d / n - 2.0 * dot(m, yp);
        Vec dm = scaled(m, -z);
        axpy(-1.0, yp, dm);

        axpy(dtau, dm, m);
        v = guard_v(v + dtau * dv, tau);

        trace.taus.push_back((i + 1) * dtau);
        trace.m.push_back(m);
        trace.v.push_back(v);
    }
    return trace;
}

VtildeTrace integrate_vtilde(const ScalarFn& nu, const ScalarFn& ynorm, double v0,
                             double kappa, double T, int d, double sigma) {
    if (!(kappa > 0.0)) throw std::invalid_argument("integrate_vtilde: kappa must be > 0");
    if (v0 < 0.0) throw std::invalid_argument("integrate_vtilde: v0 must be >= 0");
    const int steps = static_cast<int>(std::llround(T / kappa));

    VtildeTrace trace;
    trace.taus.reserve(static_cast<std::size_t>(steps) + 1);
    trace.v.reserve(static_cast<std::size_t>(steps) + 1);
    trace.zeta.reserve(static_cast<std::size_t>(steps) + 1);

    double v = v0;
    trace.taus.push_back(0.0);
    trace.v.push_back(v);
    trace.zeta.push_back(optimal_zeta(v, nu(0.0), d, sigma));

    for (int i = 0; i < steps; ++i) {
        const double tau = i * kappa;
        const double n = nu(tau);
        if (!(n > 0.0)) throw std::invalid_argument("integrate_vtilde: nu must be > 0");
        const double z = optimal_zeta(v, n, d, sigma);
        const double dv = ((d + 1) * z * z / n - 2.0 * z) * v + z * z * sigma * sigma * d / n +
                          2.0 * ynorm(tau) * std::sqrt(v);
        v = guard_v(v + kappa * dv, tau);
        const double next_tau = (i + 1) * kappa;
        trace.taus.push_back(next_tau);
        trace.v.push_back(v);
        trace.zeta.push_back(optimal_zeta(v, nu(next_tau), d, sigma));
    }
    return trace;
}

ConvexUpperBound bound_upper_convex(const RunTrace& trace, double smooth_l, double sigma,
                                    double d_max) {
    ConvexUpperBound out;
    const double sigma2 = sigma * sigma;
    double prev_inv_a = 0.0;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const StepRecord& r = trace.records[i];
        if (r.eta * smooth_l > 1.0 + 1e-12) ++out.eta_violations;
        const double a = a_upper(r.eta, smooth_l);
        if (!(a > 0.0)) {
            throw std::invalid_argument("bound_upper_convex: a_t <= 0 at t=" +
                                        std::to_string(r.t) + " (eta out of range)");
        }
        const double inv_a = 1.0 / a;
        const double noise = sigma2 * r.eta * r.eta / r.batch_size;

        const double oracle_inc = (r.dist * r.dist - r.dist_next * r.dist_next) * inv_a +
                                  noise * inv_a + r.gamma * r.gamma * inv_a +
                                  2.0 * r.inner_shift * inv_a;
        out.oracle_increments.push_back(oracle_inc);
        out.oracle_form += oracle_inc;

        double obs_inc = (noise + r.gamma * r.gamma + 2.0 * d_max * r.gamma) * inv_a;
        if (i == 0) {
            obs_inc += d_max * d_max * inv_a;
        } else {
            obs_inc += d_max * d_max * std::max(inv_a - prev_inv_a, 0.0);
        }
        out.observable_increments.push_back(obs_inc);
        out.observable_form += obs_inc;
        prev_inv_a = inv_a;
    }
    return out;
}

ConvexLowerBound bound_lower_convex(const RunTrace& trace, double smooth_l, double strong_mu,
                                    double sigma) {
    if (!(strong_mu > 0.0)) throw std::invalid_argument("bound_lower_convex: mu must be > 0");
    ConvexLowerBound out;
    const double sigma2 = sigma * sigma;
    for (const StepRecord& r : trace.records) {
        if (r.eta * strong_mu > 1.0 + 1e-12) {
            throw std::invalid_argument("bound_lower_convex: eta > 1/mu at t=" +
                                        std::to_string(r.t));
        }
        const double a = 2.0 * (r.eta + (smooth_l / strong_mu) * r.eta -
                                r.eta * r.eta * smooth_l);
        if (!(a > 0.0)) {
            throw std::invalid_argument("bound_lower_convex: a'_t <= 0 at t=" +
                                        std::to_string(r.t));
        }
        const double inc = (r.dist * r.dist - r.dist_next * r.dist_next) / a +
                           sigma2 * r.eta * r.eta / (r.batch_size * a) +
                           r.gamma * r.gamma / a + 2.0 * r.inner_shift / a;
        out.increments.push_back(inc);
        out.value += inc;
    }
    return out;
}

NonconvexUpperBound bound_upper_nonconvex(const RunTrace& trace, double smooth_l,
                                          double sigma) {
    NonconvexUpperBound out;
    const double sigma2 = sigma * sigma;
    double prev_inv_a = 0.0;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const StepRecord& r = trace.records[i];
        if (r.eta * smooth_l > 1.0 + 1e-12) {
            throw std::invalid_argument("bound_upper_nonconvex: eta > 1/L at t=" +
                                        std::to_string(r.t));
        }
        const double a = a_upper(r.eta, smooth_l);
        if (!(a > 0.0)) {
            throw std::invalid_argument("bound_upper_nonconvex: a_t <= 0 at t=" +
                                        std::to_string(r.t));
        }
        const double inv_a = 1.0 / a;
        double inc = (smooth_l * sigma2 * r.eta * r.eta / r.batch_size + 2.0 * r.gamma) * inv_a;
        if (i == 0) {
            inc += 2.0 * r.loss_est * inv_a;
        } else {
            inc += 2.0 * r.loss_est * (inv_a - prev_inv_a);
        }
        out.increments.push_back(inc);
        out.value += inc;
        prev_inv_a = inv_a;
    }
    return out;
}

MomentTrace ensemble_moments(const ExperimentConfig& config, int n_replicas, double epsilon,
                             int jobs) {
    if (config.problem.kind != ProblemKind::linear) {
        throw std::invalid_argument("ensemble_moments: linear problems only");
    }
    if (n_replicas < 2) throw std::invalid_argument("ensemble_moments: needs >= 2 replicas");
    if (jobs < 1) jobs = 1;
    jobs = std::min(jobs, n_replicas);

    const int points = config.horizon + 1;  // snapshots before step 1 and after each step
    const int d = config.d;

    struct Accum {
        std::vector<double> sum_x;  // points * d
        std::vector<double> sum_sq; // points
    };
    std::vector<Accum> partials(static_cast<std::size_t>(jobs));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));

    auto replicas_of = [&](int w, int lo, int hi) {
        Accum& acc = partials[static_cast<std::size_t>(w)];
        acc.sum_x.assign(static_cast<std::size_t>(points) * d, 0.0);
        acc.sum_sq.assign(static_cast<std::size_t>(points), 0.0);
        for (int rep = lo; rep < hi; ++rep) {
            ExperimentConfig rc = config;
            rc.seed = mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(rep));
            rc.capture_iterates = true;
            RunTrace trace = run_online(rc);
            for (int j = 0; j < points; ++j) {
                const Vec& theta = trace.iterates[static_cast<std::size_t>(j)];
                const Vec& star = config.path.at(j + 1);
                double sq = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double x = theta[static_cast<std::size_t>(i)] -
                                     star[static_cast<std::size_t>(i)];
                    acc.sum_x[static_cast<std::size_t>(j) * d + i] += x;
                    sq += x * x;
                }
                acc.sum_sq[static_cast<std::size_t>(j)] += sq;
            }
        }
    };
    auto worker = [&](int w, int lo, int hi) {
        try {
            replicas_of(w, lo, hi);
        } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
    };

    const int chunk = (n_replicas + jobs - 1) / jobs;
    std::vector<std::thread> threads;
    for (int w = 0; w < jobs; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(n_replicas, lo + chunk);
        if (lo >= hi) {
            partials[static_cast<std::size_t>(w)].sum_x.assign(
                static_cast<std::size_t>(points) * d, 0.0);
            partials[static_cast<std::size_t>(w)].sum_sq.assign(
                static_cast<std::size_t>(points), 0.0);
            continue;
        }
        threads.emplace_back(worker, w, lo, hi);
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    MomentTrace out;
    out.taus.resize(static_cast<std::size_t>(points));
    out.m.assign(static_cast<std::size_t>(points), zeros(d));
    out.v.assign(static_cast<std::size_t>(points), 0.0);
    const double inv_n = 1.0 / static_cast<double>(n_replicas);
    for (int j = 0; j < points; ++j) {
        out.taus[static_cast<std::size_t>(j)] = epsilon * j;
        for (const Accum& acc : partials) {
            for (int i = 0; i < d; ++i) {
                out.m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] +=
                    acc.sum_x[static_cast<std::size_t>(j) * d + i];
            }
            out.v[static_cast<std::size_t>(j)] += acc.sum_sq[static_cast<std::size_t>(j)];
        }
        for (int i = 0; i < d; ++i) out.m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] *= inv_n;
        out.v[static_cast<std::size_t>(j)] *= inv_n;
    }
    return out;
}

SteinCheck stein_check(const Vec& u, long n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("stein_check: n must be >= 1");
    const int d = static_cast<int>(u.size());
    SteinCheck out;
    out.empirical.assign(static_cast<std::size_t>(d) * d, 0.0);
    out.analytic.assign(static_cast<std::size_t>(d) * d, 0.0);

    const double u2 = squared_norm(u);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            out.analytic[static_cast<std::size_t>(i) * d + j] =
                (i == j ? u2 : 0.0) + u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(j)];
        }
    }

    // (xx^T - I) u u^T (xx^T - I)^T = w w^T with w = x <x,u> - u.
    for (long k = 0; k < n; ++k) {
        const Vec x = gaussian_vec(d, rng);
        const double xu = dot(x, u);
        for (int i = 0; i < d; ++i) {
            const double wi = x[static_cast<std::size_t>(i)] * xu - u[static_cast<std::size_t>(i)];
            for (int j = 0; j < d; ++j) {
                const double wj = x[static_cast<std::size_t>(j)] * xu - u[static_cast<std::size_t>(j)];
                out.empirical[static_cast<std::size_t>(i) * d + j] += wi * wj;
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& e : out.empirical) e *= inv_n;

    for (int i = 0; i < d * d; ++i) {
        out.max_abs_dev = std::max(out.max_abs_dev,
                                   std::abs(out.empirical[static_cast<std::size_t>(i)] -
                                            out.analytic[static_cast<std::size_t>(i)]));
    }
    return out;
}

}  // namespace shiftlab
