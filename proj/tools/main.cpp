// shiftlab command line: configuration-driven online-SGD experiments,
// schedule traces, and numerical validation of the regret theory.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shiftlab/config.hpp"
#include "shiftlab/csv_io.hpp"
#include "shiftlab/engine.hpp"
#include "shiftlab/theory.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shiftlab;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitValidation = 4;

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    int jobs = 0;
};

int effective_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

AppConfig load_app(const CliOptions& opts) {
    AppConfig app = load_config(opts.config_path);
    if (!opts.out_dir.empty()) app.output.dir = opts.out_dir;
    if (opts.seed) app.engine.seed = *opts.seed;
    if (opts.replicas) {
        app.validation.replicas = *opts.replicas;
        app.validation.bound_replicas = *opts.replicas;
    }
    fs::create_directories(app.output.dir);
    return app;
}

json scheduler_stats(const RunTrace& trace, const std::string& name) {
    double lo = 0.0, hi = 0.0, sum = 0.0;
    if (!trace.records.empty()) {
        lo = hi = trace.records.front().eta;
        for (const auto& r : trace.records) {
            lo = std::min(lo, r.eta);
            hi = std::max(hi, r.eta);
            sum += r.eta;
        }
    }
    return json{{"name", name},
                {"mean_eta", trace.records.empty() ? 0.0 : sum / trace.records.size()},
                {"min_eta", lo},
                {"max_eta", hi}};
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

int cmd_run(const CliOptions& opts) {
    AppConfig app = load_app(opts);
    ExperimentConfig cfg = app.materialize();

    const auto t0 = std::chrono::steady_clock::now();
    SchedulerSpec spec = cfg.scheduler;
    if (spec.v0_auto) spec.params.v0 = resolve_v0(cfg);
    auto scheduler = make_scheduler(spec);
    RunTrace trace = run_online(cfg, *scheduler);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

    write_trace_csv(app.output.dir + "/trace.csv", trace);
    if (app.output.write_path) write_path_csv(app.output.dir + "/path.csv", cfg.path);

    json summary{{"config", json::parse(app.raw_json)},
                 {"seed", cfg.seed},
                 {"total_regret", trace.total_regret()},
                 {"steps", trace.steps()},
                 {"runtime_ms", ms},
                 {"projection_bind_count", trace.projection_bind_count},
                 {"scheduler_stats", scheduler_stats(trace, scheduler->name())}};
    write_json(app.output.dir + "/summary.json", summary);
    return kExitOk;
}

struct SweepRow {
    std::string value_label;
    std::uint64_t seed = 0;
    double total_regret = 0.0;
    double mean_eta = 0.0;
    long runtime_ms = 0;
    bool ok = false;
    std::string error;
};

int cmd_sweep(const CliOptions& opts) {
    AppConfig app = load_app(opts);
    if (app.sweep.param.empty()) throw ConfigError("sweep section missing from config");

    struct Point {
        std::string label;
        double value = 0.0;
        std::string sched_kind;
    };
    std::vector<Point> points;
    if (app.sweep.param == "scheduler") {
        for (const auto& name : app.sweep.scheduler_values)
            points.push_back({name, 0.0, name});
    } else {
        for (double v : app.sweep.values) points.push_back({format_double(v), v, ""});
    }

    std::vector<SweepRow> rows(points.size() * app.sweep.seeds.size());
    std::atomic<std::size_t> next{0};

    auto run_one = [&](std::size_t idx) {
        const Point& pt = points[idx / app.sweep.seeds.size()];
        const std::uint64_t seed = app.sweep.seeds[idx % app.sweep.seeds.size()];
        SweepRow& row = rows[idx];
        row.value_label = pt.label;
        row.seed = seed;
        try {
            AppConfig variant = app;
            variant.engine.seed = seed;
            if (app.sweep.param == "eta") {
                variant.engine.scheduler.kind = "constant";
                variant.engine.scheduler.eta = pt.value;
            } else if (app.sweep.param == "d") {
                const int d = static_cast<int>(pt.value);
                if (d < 1) throw ConfigError("sweep d values must be >= 1");
                variant.engine.d = d;
                variant.engine.theta0 = zeros(d);
                variant.engine.projection =
                    ProjectionSet(zeros(d), app.engine.projection.radius);
                variant.engine.scheduler.params.d = d;
                variant.engine.scheduler.params.d_max =
                    variant.engine.projection.diameter();
                if (app.sweep.epsilon_inv_sqrt_d) {
                    variant.engine.scheduler.params.epsilon =
                        1.0 / std::sqrt(static_cast<double>(d));
                }
            } else if (app.sweep.param == "l") {
                variant.path_spec.downsample = static_cast<int>(pt.value);
            } else if (app.sweep.param == "scheduler") {
                variant.engine.scheduler.kind = pt.sched_kind;
            }
            ExperimentConfig cfg = variant.materialize();
            const auto t0 = std::chrono::steady_clock::now();
            RunTrace trace = run_online(cfg);
            row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
            row.total_regret = trace.total_regret();
            double sum = 0.0;
            for (const auto& r : trace.records) sum += r.eta;
            row.mean_eta = trace.records.empty() ? 0.0 : sum / trace.records.size();
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };

    const int jobs = std::min<std::size_t>(effective_jobs(opts.jobs), rows.size());
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= rows.size()) return;
                run_one(idx);
            }
        });
    }
    for (auto& th : workers) th.join();

    std::ofstream out(app.output.dir + "/sweep.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open sweep.csv for writing");
    out << "# shiftlab-sweep-v1\n";
    out << "param,value,seed,total_regret,mean_eta,runtime_ms,status\n";
    bool any_failed = false;
    for (const auto& row : rows) {
        out << app.sweep.param << ',' << row.value_label << ',' << row.seed << ','
            << format_double(row.total_regret) << ',' << format_double(row.mean_eta) << ','
            << row.runtime_ms << ',' << (row.ok ? "ok" : "failed") << '\n';
        if (!row.ok) {
            any_failed = true;
            std::cerr << "sweep point " << row.value_label << " seed " << row.seed
                      << " failed: " << row.error << '\n';
        }
    }
    return any_failed ? 1 : kExitOk;
}

// Max relative deviation of the ensemble second moment from the Euler ODE
// solution, compared on the coarser of the two grids.
double moment_deviation(const MomentTrace& empirical, const MomentTrace& ode, int stride) {
    double dev = 0.0;
    for (std::size_t j = 1; j < empirical.v.size(); ++j) {
        const std::size_t k = j * static_cast<std::size_t>(stride);
        if (k >= ode.v.size()) break;
        const double ref = ode.v[k];
        if (ref <= 0.0) continue;
        dev = std::max(dev, std::abs(empirical.v[j] - ref) / ref);
    }
    return dev;
}

json validate_ode_at(const AppConfig& app, double epsilon, double nu, int replicas, int jobs) {
    ExperimentConfig cfg = app.materialize();
    if (cfg.problem.kind != ProblemKind::linear)
        throw ConfigError("validate-ode requires a linear problem");
    if (app.path_spec.kind != "constant")
        throw ConfigError("validate-ode requires a constant path (no shift)");
    if (app.engine.scheduler.kind != "constant")
        throw ConfigError("validate-ode requires a constant schedule (eta = epsilon)");

    // Hold the continuous-time problem (zeta = 1, nu) fixed while varying epsilon.
    const double horizon_tau = app.engine.horizon * (app.engine.scheduler.eta);
    cfg.horizon = std::max(1, static_cast<int>(std::llround(horizon_tau / epsilon)));
    cfg.batch_size = std::max(1, static_cast<int>(std::llround(nu * epsilon)));
    cfg.batch_schedule.clear();
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = epsilon;

    MomentTrace empirical = ensemble_moments(cfg, replicas, epsilon, jobs);

    const Vec theta0 = cfg.theta0.empty() ? zeros(cfg.d) : cfg.theta0;
    const Vec m0 = sub(theta0, cfg.path.at(1));
    const double dtau = epsilon / 10.0;
    MomentTrace ode = integrate_moments([](double) { return 1.0; },
                                        [nu](double) { return nu; },
                                        [&](double) { return zeros(cfg.d); }, m0,
                                        squared_norm(m0), dtau, epsilon * cfg.horizon,
                                        cfg.problem.noise_sigma);
    const double dev = moment_deviation(empirical, ode, 10);
    write_moments_csv(app.output.dir + "/moments_empirical_eps" + format_double(epsilon) + ".csv",
                      empirical);
    write_moments_csv(app.output.dir + "/moments_ode_eps" + format_double(epsilon) + ".csv", ode);
    return json{{"epsilon", epsilon},
                {"batch_size", cfg.batch_size},
                {"steps", cfg.horizon},
                {"replicas", replicas},
                {"max_rel_dev", dev}};
}

int cmd_validate_ode(const CliOptions& opts) {
    AppConfig app = load_app(opts);
    const double eps_fine = app.engine.scheduler.eta;
    const double nu = static_cast<double>(app.engine.batch_size) / eps_fine;
    const int jobs = effective_jobs(opts.jobs);

    json fine = validate_ode_at(app, eps_fine, nu, app.validation.replicas, jobs);
    json coarse =
        validate_ode_at(app, app.validation.coarse_epsilon, nu, app.validation.replicas, jobs);

    const bool pass = fine.at("max_rel_dev").get<double>() <= app.validation.tolerance;
    json report{{"fine", fine},
                {"coarse", coarse},
                {"tolerance", app.validation.tolerance},
                {"coarse_dev_larger", coarse.at("max_rel_dev").get<double>() >
                                          fine.at("max_rel_dev").get<double>()},
                {"pass", pass}};
    write_json(app.output.dir + "/ode_report.json", report);
    std::cout << report.dump(2) << '\n';
    return pass ? kExitOk : kExitValidation;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe r;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) r.mean += x;
    r.mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    if (xs.size() > 1) r.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return r;
}

int cmd_validate_bounds(const CliOptions& opts) {
    AppConfig app = load_app(opts);
    const int replicas = app.validation.bound_replicas;
    const ExperimentConfig base = app.materialize();

    std::vector<RunTrace> traces;
    traces.reserve(static_cast<std::size_t>(replicas));
    for (int r = 0; r < replicas; ++r) {
        ExperimentConfig cfg = base;
        cfg.seed = mix_seed(app.engine.seed, 5000 + static_cast<std::uint64_t>(r));
        traces.push_back(run_online(cfg));
    }

    json report;
    bool pass = false;
    if (base.problem.kind == ProblemKind::nonconvex) {
        const double L = base.problem.smoothness();
        std::vector<double> gaps;
        std::vector<double> regs;
        for (const auto& trace : traces) {
            const double reg = trace.total_regret();
            const double ub = bound_upper_nonconvex(trace, L, base.problem.noise_sigma).value;
            regs.push_back(reg);
            gaps.push_back(ub - reg);
        }
        const NonconvexUpperBound first =
            bound_upper_nonconvex(traces.front(), L, base.problem.noise_sigma);
        write_bounds_csv(app.output.dir + "/bounds.csv", {"upper_nonconvex_inc"},
                         {first.increments});
        const MeanSe gap = mean_se(gaps);
        const MeanSe reg = mean_se(regs);
        pass = gap.mean >= -2.0 * gap.se;
        report = json{{"kind", "nonconvex"},
                      {"replicas", replicas},
                      {"mean_regret", reg.mean},
                      {"mean_upper_minus_regret", gap.mean},
                      {"se_upper_minus_regret", gap.se},
                      {"pass", pass}};
    } else if (base.problem.kind == ProblemKind::linear) {
        const double L = 1.0;
        const double mu = 1.0;
        double d_cap = 0.0;
        long binds = 0;
        for (const auto& trace : traces) {
            binds += trace.projection_bind_count;
            for (const auto& rec : trace.records) {
                d_cap = std::max(d_cap, std::max(rec.dist, rec.dist_next));
            }
        }
        // Assumption-(i) constants for the linear family on the visited region:
        // the lower bound may use any understatement of the per-sample gradient
        // variance, the upper bound needs a majorant.
        const double sn2 = base.problem.noise_sigma * base.problem.noise_sigma;
        const double sigma_lo = std::sqrt(sn2 * base.d);
        const double sigma_up = std::sqrt((base.d + 1) * d_cap * d_cap + sn2 * base.d);

        std::vector<double> lo_gaps, up_gaps, regs;
        for (const auto& trace : traces) {
            const double reg = trace.total_regret();
            const double lower = bound_lower_convex(trace, L, mu, sigma_lo).value;
            const double upper =
                bound_upper_convex(trace, L, sigma_up, base.projection.diameter()).oracle_form;
            regs.push_back(reg);
            lo_gaps.push_back(reg - lower);
            up_gaps.push_back(upper - reg);
        }
        const MeanSe lo = mean_se(lo_gaps);
        const MeanSe up = mean_se(up_gaps);
        const MeanSe reg = mean_se(regs);
        const ConvexUpperBound first_up =
            bound_upper_convex(traces.front(), L, sigma_up, base.projection.diameter());
        const ConvexLowerBound first_lo = bound_lower_convex(traces.front(), L, mu, sigma_lo);
        write_bounds_csv(app.output.dir + "/bounds.csv",
                         {"upper_oracle_inc", "upper_observable_inc", "lower_inc"},
                         {first_up.oracle_increments, first_up.observable_increments,
                          first_lo.increments});
        pass = binds == 0 && lo.mean >= -2.0 * lo.se && up.mean >= -2.0 * up.se;
        report = json{{"kind", "convex"},
                      {"replicas", replicas},
                      {"projection_bind_count", binds},
                      {"d_cap", d_cap},
                      {"sigma_lower", sigma_lo},
                      {"sigma_upper", sigma_up},
                      {"mean_regret", reg.mean},
                      {"mean_regret_minus_lower", lo.mean},
                      {"se_regret_minus_lower", lo.se},
                      {"mean_upper_minus_regret", up.mean},
                      {"se_upper_minus_regret", up.se},
                      {"pass", pass}};
    } else {
        throw ConfigError("validate-bounds supports linear and nonconvex problems");
    }

    write_json(app.output.dir + "/bounds_report.json", report);
    std::cout << report.dump(2) << '\n';
    return pass ? kExitOk : kExitValidation;
}

int cmd_stein(const CliOptions& opts) {
    AppConfig app = load_app(opts);
    Rng rng(mix_seed(app.stein.seed, 77));
    Vec u = unit_sphere(app.stein.d, rng);
    const SteinCheck check = stein_check(u, app.stein.n, rng);
    const bool pass = check.max_abs_dev <= app.stein.tolerance;
    json report{{"d", app.stein.d},
                {"n", app.stein.n},
                {"max_abs_dev", check.max_abs_dev},
                {"tolerance", app.stein.tolerance},
                {"pass", pass}};
    write_json(app.output.dir + "/stein_report.json", report);
    std::cout << report.dump(2) << '\n';
    return pass ? kExitOk : kExitValidation;
}

int cmd_emit_schedule(const CliOptions& opts) {
    AppConfig app = load_app(opts);
    const int T = app.engine.horizon;

    ShiftTrace gammas;
    if (app.path_spec.kind == "realized") {
        gammas = app.path_spec.gamma_kind == "bursty"
                     ? bursty_gamma(app.path_spec.episode_len, app.path_spec.s, T)
                     : smooth_gamma(app.path_spec.alpha, T);
    } else {
        gammas = gamma_of_path(build_path(app.path_spec, app.engine.d, T));
    }

    SchedulerSpec spec = app.engine.scheduler;
    if (spec.kind == "nonconvex") {
        throw ConfigError("emit-schedule needs a loss-free schedule "
                          "(constant, inverse_time, alg1 or convex)");
    }
    if (spec.v0_auto) spec.params.v0 = 1.0;  // no run context; documented default
    auto scheduler = make_scheduler(spec);

    std::vector<std::string> extra_names;
    for (const auto& [name, value] : scheduler->internals()) {
        (void)value;
        extra_names.push_back(name);
    }
    std::vector<ScheduleTraceRow> rows;
    rows.reserve(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        ScheduleQuery q;
        q.t = t;
        q.batch_size = app.engine.batch_at(t);
        q.gamma_prev = gammas.at(t - 1);
        ScheduleTraceRow row;
        row.t = t;
        row.eta = scheduler->next_eta(q);
        row.gamma_in = q.gamma_prev;
        for (const auto& [name, value] : scheduler->internals()) {
            (void)name;
            row.extras.push_back(value);
        }
        rows.push_back(row);
    }
    write_schedule_csv(app.output.dir + "/schedule.csv", extra_names, rows);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"shiftlab: online SGD under distribution shift"};
    cli.require_subcommand(1);
    cli.fallthrough();  // global options may follow the subcommand name

    CliOptions opts;
    cli.add_option("--config", opts.config_path, "JSON config path")->required();
    cli.add_option("--out", opts.out_dir, "output directory (overrides config)");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = cli.add_option("--seed", seed_opt, "seed override");
    int replicas_opt = 0;
    auto* rep_flag = cli.add_option("--replicas", replicas_opt, "replica-count override");
    cli.add_option("--jobs", opts.jobs, "worker threads (0 = hardware)");

    auto* run = cli.add_subcommand("run", "single online run, writes trace.csv + summary.json");
    auto* sweep = cli.add_subcommand("sweep", "grid sweep, writes sweep.csv");
    auto* vode = cli.add_subcommand("validate-ode", "ensemble vs moment-ODE check");
    auto* vbounds = cli.add_subcommand("validate-bounds", "regret bound envelope check");
    auto* stein = cli.add_subcommand("stein", "Gaussian covariance identity check");
    auto* emit = cli.add_subcommand("emit-schedule", "schedule trace without SGD");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (*seed_flag) opts.seed = seed_opt;
    if (*rep_flag) opts.replicas = replicas_opt;

    try {
        if (*run) return cmd_run(opts);
        if (*sweep) return cmd_sweep(opts);
        if (*vode) return cmd_validate_ode(opts);
        if (*vbounds) return cmd_validate_bounds(opts);
        if (*stein) return cmd_stein(opts);
        if (*emit) return cmd_emit_schedule(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "numeric divergence: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitConfig;
}
