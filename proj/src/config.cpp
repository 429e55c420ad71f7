#include "shiftlab/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace shiftlab {

namespace {

using nlohmann::json;

Vec parse_vec(const json& j, int d) {
    Vec v = j.get<Vec>();
    if (static_cast<int>(v.size()) > d) {
        throw ConfigError("vector literal longer than dimension d");
    }
    v.resize(static_cast<std::size_t>(d), 0.0);
    return v;
}

ProblemSpec parse_problem(const json& j) {
    ProblemSpec p;
    const std::string kind = j.value("kind", "linear");
    if (kind == "linear") {
        p.kind = ProblemKind::linear;
    } else if (kind == "logistic") {
        p.kind = ProblemKind::logistic;
    } else if (kind == "nonconvex") {
        p.kind = ProblemKind::nonconvex;
    } else {
        throw ConfigError("problem.kind must be linear, logistic or nonconvex");
    }
    p.noise_sigma = j.value("sigma", 0.1);
    p.nonconvex_lambda = j.value("lambda", 0.05);
    const std::string cov = j.value("covariates", "gaussian");
    if (cov == "gaussian") {
        p.covariates = CovariateKind::gaussian;
    } else if (cov == "unit") {
        p.covariates = CovariateKind::unit;
    } else {
        throw ConfigError("problem.covariates must be gaussian or unit");
    }
    if (p.noise_sigma < 0.0) throw ConfigError("problem.sigma must be >= 0");
    if (p.nonconvex_lambda < 0.0) throw ConfigError("problem.lambda must be >= 0");
    return p;
}

PathSpec parse_path(const json& j) {
    PathSpec s;
    s.kind = j.value("kind", "constant");
    if (s.kind != "constant" && s.kind != "spiral" && s.kind != "realized") {
        throw ConfigError("path.kind must be constant, spiral or realized");
    }
    s.a = j.value("a", 1.0);
    s.b = j.value("b", -1.0);
    s.k = j.value("k", 4);
    s.downsample = j.value("downsample", 1);
    if (j.contains("gamma")) {
        const json& g = j.at("gamma");
        s.gamma_kind = g.value("kind", "smooth");
        if (s.gamma_kind != "smooth" && s.gamma_kind != "bursty") {
            throw ConfigError("path.gamma.kind must be smooth or bursty");
        }
        s.alpha = g.value("alpha", 1.0);
        s.episode_len = g.value("episode_len", 40);
        s.s = g.value("s", 1.0);
    }
    s.path_seed = j.value("path_seed", static_cast<std::uint64_t>(7));
    if (j.contains("start")) s.start = j.at("start").get<Vec>();
    if (j.contains("point")) s.point = j.at("point").get<Vec>();
    return s;
}

// Scheduler defaults depend on the problem; "auto" fields stay unset here and
// are resolved in finalize_scheduler.
SchedulerSpec parse_scheduler(const json& j) {
    SchedulerSpec s;
    s.kind = j.value("kind", "constant");
    s.eta = j.value("eta", 0.1);
    s.c0 = j.value("c0", 1.0);
    s.c1 = j.value("c1", 0.0);
    s.params.epsilon = j.value("epsilon", 0.1);
    s.params.kappa = j.value("kappa", 1e-3);
    s.params.beta = j.value("beta", 0.9);
    s.params.sigma = j.value("sigma", -1.0);      // < 0 means auto
    s.params.smooth_l = j.value("L", -1.0);       // < 0 means auto
    s.params.d_max = j.value("D_max", -1.0);      // < 0 means auto
    s.params.strong_mu = j.value("mu", 1.0);
    if (j.contains("v0") && j.at("v0").is_number()) {
        s.params.v0 = j.at("v0").get<double>();
        s.v0_auto = false;
    } else {
        s.v0_auto = true;
    }
    return s;
}

void finalize_scheduler(SchedulerSpec& s, const ProblemSpec& problem, int d,
                        const ProjectionSet& projection) {
    s.params.d = d;
    if (s.params.sigma < 0.0) {
        switch (problem.kind) {
            case ProblemKind::linear:
                s.params.sigma = s.kind == "convex"
                                     ? problem.noise_sigma * std::sqrt(static_cast<double>(d))
                                     : problem.noise_sigma;
                break;
            case ProblemKind::logistic:
                // sigma^2 = d/4 for the log loss on soft sigmoid targets.
                s.params.sigma = 0.5 * std::sqrt(static_cast<double>(d));
                break;
            case ProblemKind::nonconvex:
                s.params.sigma = problem.noise_sigma;
                break;
        }
        // the closed forms divide by sigma^2; noiseless problems get a floor
        s.params.sigma = std::max(s.params.sigma, 1e-6);
    }
    if (s.params.smooth_l < 0.0) s.params.smooth_l = problem.smoothness();
    if (s.params.d_max < 0.0) s.params.d_max = projection.diameter();
}

}  // namespace

OraclePath build_path(const PathSpec& spec, int d, int T) {
    if (spec.kind == "spiral") {
        OraclePath p = spiral_path(d, T, spec.a, spec.b, spec.k);
        if (spec.downsample > 1) p = downsample_path(p, spec.downsample);
        return p;
    }
    if (spec.kind == "realized") {
        ShiftTrace gammas = spec.gamma_kind == "bursty"
                                ? bursty_gamma(spec.episode_len, spec.s, T - 1)
                                : smooth_gamma(spec.alpha, T - 1);
        Vec start = spec.start;
        start.resize(static_cast<std::size_t>(d), 0.0);
        Rng rng(mix_seed(spec.path_seed, 99));
        return realize_path(gammas, d, start, rng);
    }
    // constant
    Vec point = spec.point;
    point.resize(static_cast<std::size_t>(d), 0.0);
    OraclePath p;
    p.points.assign(static_cast<std::size_t>(T), point);
    return p;
}

ExperimentConfig AppConfig::materialize() const {
    ExperimentConfig cfg = engine;
    cfg.path = build_path(path_spec, cfg.d, cfg.horizon);
    return cfg;
}

AppConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    try {
        AppConfig app;
        app.raw_json = j.dump();

        const json engine = j.value("engine", json::object());
        app.engine.d = engine.value("d", 2);
        app.engine.horizon = engine.value("T", 100);
        app.engine.batch_size = engine.value("batch_size", 1);
        if (engine.contains("batch_schedule")) {
            app.engine.batch_schedule = engine.at("batch_schedule").get<std::vector<int>>();
        }
        app.engine.seed = engine.value("seed", static_cast<std::uint64_t>(1));
        app.engine.n_validation = engine.value("n_validation", 4096);
        app.engine.revealed_gamma = engine.value("revealed_gamma", true);
        app.engine.ema_beta = engine.value("ema_beta", 0.9);
        if (app.engine.d < 1) throw ConfigError("engine.d must be >= 1");
        if (app.engine.horizon < 1) throw ConfigError("engine.T must be >= 1");
        if (app.engine.batch_size < 1) throw ConfigError("engine.batch_size must be >= 1");

        const json proj = engine.value("projection", json::object());
        const double radius = proj.value("radius", 10.0);
        Vec center = proj.contains("center") ? parse_vec(proj.at("center"), app.engine.d)
                                             : zeros(app.engine.d);
        app.engine.projection = ProjectionSet(std::move(center), radius);

        app.engine.theta0 = engine.contains("theta0") ? parse_vec(engine.at("theta0"), app.engine.d)
                                                      : zeros(app.engine.d);

        app.engine.problem = parse_problem(j.value("problem", json::object()));
        app.path_spec = parse_path(j.value("path", json::object()));
        app.engine.scheduler = parse_scheduler(j.value("scheduler", json::object()));
        finalize_scheduler(app.engine.scheduler, app.engine.problem, app.engine.d,
                           app.engine.projection);

        if (j.contains("sweep")) {
            const json& sw = j.at("sweep");
            app.sweep.param = sw.value("param", "eta");
            if (app.sweep.param != "eta" && app.sweep.param != "d" && app.sweep.param != "l" &&
                app.sweep.param != "scheduler") {
                throw ConfigError("sweep.param must be eta, d, l or scheduler");
            }
            if (sw.contains("values")) {
                if (app.sweep.param == "scheduler") {
                    app.sweep.scheduler_values =
                        sw.at("values").get<std::vector<std::string>>();
                } else {
                    app.sweep.values = sw.at("values").get<std::vector<double>>();
                }
            }
            if (sw.contains("seeds")) {
                app.sweep.seeds = sw.at("seeds").get<std::vector<std::uint64_t>>();
            } else if (sw.contains("seed_count")) {
                const int n = sw.at("seed_count").get<int>();
                app.sweep.seeds.clear();
                for (int i = 1; i <= n; ++i) app.sweep.seeds.push_back(static_cast<std::uint64_t>(i));
            }
            app.sweep.epsilon_inv_sqrt_d = sw.value("epsilon_inv_sqrt_d", false);
            if (app.sweep.values.empty() && app.sweep.scheduler_values.empty()) {
                throw ConfigError("sweep.values must be nonempty");
            }
        }

        const json val = j.value("validation", json::object());
        app.validation.tolerance = val.value("tolerance", 0.10);
        app.validation.replicas = val.value("replicas", 10000);
        app.validation.coarse_epsilon = val.value("coarse_epsilon", 0.1);
        app.validation.bound_replicas = val.value("bound_replicas", 100);

        const json st = j.value("stein", json::object());
        app.stein.d = st.value("d", 3);
        app.stein.n = st.value("n", static_cast<long>(1000000));
        app.stein.tolerance = st.value("tolerance", 0.02);
        app.stein.seed = st.value("seed", static_cast<std::uint64_t>(1));

        const json out = j.value("output", json::object());
        app.output.dir = out.value("dir", ".");
        app.output.write_path = out.value("write_path", false);

        return app;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

AppConfig load_config(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw ConfigError("cannot open config file: " + file_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace shiftlab
