#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "shiftlab/engine.hpp"
#include "test_util.hpp"

using namespace shiftlab;

namespace {

ExperimentConfig constant_path_config(int d, int T, const Vec& star) {
    ExperimentConfig cfg;
    cfg.d = d;
    cfg.horizon = T;
    cfg.path.points.assign(static_cast<std::size_t>(T), star);
    cfg.projection = ProjectionSet(zeros(d), 100.0);
    cfg.theta0 = zeros(d);
    return cfg;
}

struct FixedEta final : Scheduler {
    double value;
    explicit FixedEta(double v) : value(v) {}
    double next_eta(const ScheduleQuery&) override { return value; }
    std::string name() const override { return "fixed"; }
};

}  // namespace

TEST_CASE("sgd_step hand computation on the squared loss") {
    Batch batch;
    batch.x = {Vec{1.0, 0.0}};
    batch.y = {1.0};
    ProjectionSet set(zeros(2), 10.0);
    const Vec next = sgd_step(zeros(2), batch, 1.0, ProblemKind::linear, set);
    CHECK(next[0] == doctest::Approx(1.0));
    CHECK(next[1] == doctest::Approx(0.0));
}

TEST_CASE("sgd_step with zero step size is the identity") {
    Batch batch;
    batch.x = {Vec{0.3, -2.0}};
    batch.y = {0.7};
    ProjectionSet set(zeros(2), 10.0);
    const Vec theta{0.4, 0.9};
    CHECK(sgd_step(theta, batch, 0.0, ProblemKind::linear, set) == theta);
}

TEST_CASE("sgd_step projects updates that leave the ball") {
    Batch batch;
    batch.x = {Vec{1.0, 0.0}};
    batch.y = {10.0};
    ProjectionSet set(zeros(2), 1.0);
    const Vec next = sgd_step(zeros(2), batch, 1.0, ProblemKind::linear, set);
    // unprojected update is (10, 0); radial projection lands on the sphere
    CHECK(next[0] == doctest::Approx(1.0));
    CHECK(next[1] == doctest::Approx(0.0));
}

TEST_CASE("regret_linear_exact") {
    CHECK(regret_linear_exact(Vec{1.0, 2.0}, Vec{1.0, 2.0}) == 0.0);
    CHECK(regret_linear_exact(Vec{1.0, 1.0}, Vec{0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(regret_linear_exact(Vec{3.0, 4.0}, Vec{0.0, 0.0}) == doctest::Approx(12.5));
}

TEST_CASE("regret_mc is exactly zero at the oracle and near-exact for linear") {
    Rng rng(7);
    ProblemSpec problem;
    problem.kind = ProblemKind::linear;
    problem.noise_sigma = 1.0;
    const Vec star{0.5, -0.5};
    CHECK(regret_mc(star, star, problem, 1000, rng) == 0.0);

    const Vec theta{1.5, 0.5};
    const double exact = regret_linear_exact(theta, star);
    const double mc = regret_mc(theta, star, problem, 10000, rng);
    CHECK(testutil::rel_close(mc, exact, 0.1));

    CHECK_THROWS_AS(regret_mc(theta, star, problem, 0, rng), std::invalid_argument);
}

TEST_CASE("regret_gradnorm") {
    const Vec star{0.2, -0.4};
    CHECK(regret_gradnorm(star, star, 0.3) == 0.0);

    const Vec theta{1.2, 0.6};
    CHECK(regret_gradnorm(theta, star, 0.0) ==
          doctest::Approx(squared_norm(sub(theta, star))));

    // matches a finite-difference gradient norm
    const double lambda = 0.2;
    const double h = 1e-6;
    Vec fd(2);
    for (int i = 0; i < 2; ++i) {
        Vec plus = theta, minus = theta;
        plus[static_cast<std::size_t>(i)] += h;
        minus[static_cast<std::size_t>(i)] -= h;
        fd[static_cast<std::size_t>(i)] =
            (nonconvex_loss_and_grad(plus, star, lambda).first -
             nonconvex_loss_and_grad(minus, star, lambda).first) /
            (2.0 * h);
    }
    CHECK(testutil::rel_close(regret_gradnorm(theta, star, lambda), squared_norm(fd), 1e-5));
}

TEST_CASE("run_online with a single step yields a single record") {
    ExperimentConfig cfg = constant_path_config(2, 1, Vec{1.0, 0.0});
    cfg.problem.noise_sigma = 0.0;
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = 0.1;
    const RunTrace trace = run_online(cfg);
    REQUIRE(trace.steps() == 1);
    CHECK(trace.records[0].t == 1);
    CHECK(trace.records[0].gamma == 0.0);
}

TEST_CASE("deterministic unit covariate converges in one step at eta=1") {
    ExperimentConfig cfg = constant_path_config(1, 5, Vec{3.0});
    cfg.problem.noise_sigma = 0.0;
    cfg.problem.covariates = CovariateKind::unit;
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = 1.0;
    const RunTrace trace = run_online(cfg);
    CHECK(trace.records[0].regret == doctest::Approx(4.5));  // 1/2 * 3^2
    for (int t = 2; t <= 5; ++t) CHECK(trace.records[static_cast<std::size_t>(t - 1)].regret == 0.0);
    CHECK(trace.records[0].dist_next == doctest::Approx(0.0));
}

TEST_CASE("per-step regret is nonincreasing without shift or noise") {
    for (double eta : {0.1, 0.5, 1.0}) {
        ExperimentConfig cfg = constant_path_config(1, 30, Vec{2.0});
        cfg.problem.noise_sigma = 0.0;
        cfg.problem.covariates = CovariateKind::unit;
        cfg.scheduler.kind = "constant";
        cfg.scheduler.eta = eta;
        const RunTrace trace = run_online(cfg);
        for (std::size_t i = 1; i < trace.records.size(); ++i) {
            CHECK(trace.records[i].regret <= trace.records[i - 1].regret + 1e-15);
        }
    }
}

TEST_CASE("identical config and seed reproduce the trace bit-exactly") {
    ExperimentConfig cfg = constant_path_config(3, 40, Vec{1.0, -1.0, 0.5});
    cfg.problem.noise_sigma = 0.4;
    cfg.seed = 2024;
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = 0.05;
    const RunTrace a = run_online(cfg);
    const RunTrace b = run_online(cfg);
    REQUIRE(a.steps() == b.steps());
    for (int i = 0; i < a.steps(); ++i) {
        const StepRecord& ra = a.records[static_cast<std::size_t>(i)];
        const StepRecord& rb = b.records[static_cast<std::size_t>(i)];
        CHECK(ra.eta == rb.eta);
        CHECK(ra.dist == rb.dist);
        CHECK(ra.regret == rb.regret);
        CHECK(ra.loss_est == rb.loss_est);
        CHECK(ra.inner_shift == rb.inner_shift);
    }
}

TEST_CASE("truncating the horizon preserves the prefix (causality)") {
    Rng rng(77);
    ShiftTrace gammas = smooth_gamma(1.0, 49);
    const OraclePath path = realize_path(gammas, 2, Vec{0.5, 0.0}, rng);

    ExperimentConfig cfg;
    cfg.d = 2;
    cfg.horizon = 50;
    cfg.path = path;
    cfg.projection = ProjectionSet(zeros(2), 50.0);
    cfg.theta0 = zeros(2);
    cfg.problem.noise_sigma = 0.3;
    cfg.seed = 5;
    cfg.scheduler.kind = "convex";
    cfg.scheduler.params.sigma = 1.0;
    cfg.scheduler.params.smooth_l = 1.0;
    cfg.scheduler.params.d_max = 2.0;

    ExperimentConfig short_cfg = cfg;
    short_cfg.horizon = 20;

    const RunTrace full = run_online(cfg);
    const RunTrace prefix = run_online(short_cfg);
    for (int i = 0; i < 20; ++i) {
        CHECK(full.records[static_cast<std::size_t>(i)].eta ==
              prefix.records[static_cast<std::size_t>(i)].eta);
        CHECK(full.records[static_cast<std::size_t>(i)].regret ==
              prefix.records[static_cast<std::size_t>(i)].regret);
    }
}

TEST_CASE("iterates stay inside the projection set") {
    ExperimentConfig cfg = constant_path_config(2, 60, Vec{5.0, 0.0});
    cfg.projection = ProjectionSet(zeros(2), 1.0);  // oracle outside the ball
    cfg.problem.noise_sigma = 0.5;
    cfg.seed = 3;
    cfg.capture_iterates = true;
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = 0.5;
    const RunTrace trace = run_online(cfg);
    CHECK(trace.projection_bind_count > 0);
    for (const Vec& theta : trace.iterates) {
        CHECK(norm(theta) <= 1.0 + 1e-12);
    }
}

TEST_CASE("scheduler emitting an invalid step size aborts the run") {
    ExperimentConfig cfg = constant_path_config(2, 5, Vec{1.0, 0.0});
    FixedEta bad(-0.1);
    CHECK_THROWS_AS(run_online(cfg, bad), DivergenceError);
    FixedEta nan_eta(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(run_online(cfg, nan_eta), DivergenceError);
}

TEST_CASE("estimated-gamma mode feeds the EMA instead of the true shift") {
    Rng rng(11);
    ShiftTrace gammas = smooth_gamma(0.7, 29);
    const OraclePath path = realize_path(gammas, 2, zeros(2), rng);
    ExperimentConfig cfg;
    cfg.d = 2;
    cfg.horizon = 30;
    cfg.path = path;
    cfg.projection = ProjectionSet(zeros(2), 20.0);
    cfg.problem.noise_sigma = 0.2;
    cfg.revealed_gamma = false;
    cfg.scheduler.kind = "alg1";
    cfg.scheduler.params.epsilon = 0.2;
    cfg.scheduler.params.d = 2;
    cfg.scheduler.params.sigma = 0.2;
    const RunTrace trace = run_online(cfg);
    CHECK(trace.records[0].gamma_hat == 0.0);
    // EMA becomes positive once the iterate starts moving
    CHECK(trace.records[10].gamma_hat > 0.0);
    for (const auto& r : trace.records) {
        CHECK(r.eta >= 0.0);
        CHECK(r.eta <= 0.2);
    }
}

TEST_CASE("logistic runs produce finite paired-MC regret") {
    ExperimentConfig cfg = constant_path_config(2, 8, Vec{1.0, -0.5});
    cfg.problem.kind = ProblemKind::logistic;
    cfg.problem.noise_sigma = 0.1;
    cfg.n_validation = 512;
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = 0.5;
    const RunTrace trace = run_online(cfg);
    for (const auto& r : trace.records) {
        CHECK(std::isfinite(r.regret));
        CHECK(std::isfinite(r.loss_est));
        CHECK(r.loss_est > 0.0);  // cross entropy of soft targets is positive
    }
    // the learner moves toward the oracle, so late regret is below the first step
    CHECK(trace.records.back().regret < trace.records.front().regret);
}

TEST_CASE("estimate_sigma") {
    const Vec g{1.0, -2.0};
    CHECK(estimate_sigma({g, g, g}) == 0.0);

    const Vec minus{-1.0, 2.0};
    CHECK(estimate_sigma({g, minus}) == doctest::Approx(std::sqrt(2.0) * norm(g)).epsilon(1e-12));

    CHECK_THROWS_AS(estimate_sigma({g}), std::invalid_argument);

    // linear model at the oracle: per-sample gradient is -eps*x with unit variance
    Rng rng(13);
    const Vec star{0.7};
    Batch batch = sample_linear_batch(star, 100000, 1.0, rng);
    std::vector<Vec> grads;
    grads.reserve(batch.x.size());
    for (int k = 0; k < batch.size(); ++k) {
        grads.push_back(sample_grad(ProblemKind::linear, star, batch.x[static_cast<std::size_t>(k)],
                                    batch.y[static_cast<std::size_t>(k)]));
    }
    CHECK(testutil::rel_close(estimate_sigma(grads), 1.0, 0.05));
}

TEST_CASE("resolve_v0 uses the initial tracking error only in revealed mode") {
    ExperimentConfig cfg = constant_path_config(2, 3, Vec{3.0, 4.0});
    cfg.theta0 = zeros(2);
    cfg.revealed_gamma = true;
    CHECK(resolve_v0(cfg) == doctest::Approx(25.0));
    cfg.revealed_gamma = false;
    CHECK(resolve_v0(cfg) == 1.0);
}

TEST_CASE("a batch schedule overrides the constant batch size") {
    ExperimentConfig cfg = constant_path_config(1, 5, Vec{1.0});
    cfg.problem.noise_sigma = 0.1;
    cfg.batch_schedule = {1, 2, 3, 4};  // shorter than T: last entry repeats
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = 0.1;
    const RunTrace trace = run_online(cfg);
    const std::vector<int> want{1, 2, 3, 4, 4};
    for (int t = 1; t <= 5; ++t) {
        CHECK(trace.records[static_cast<std::size_t>(t - 1)].batch_size ==
              want[static_cast<std::size_t>(t - 1)]);
    }
}

TEST_CASE("recorded gamma matches the path shifts with a zero tail") {
    Rng rng(19);
    ShiftTrace gammas = smooth_gamma(1.0, 9);
    const OraclePath path = realize_path(gammas, 2, zeros(2), rng);
    ExperimentConfig cfg;
    cfg.d = 2;
    cfg.horizon = 10;
    cfg.path = path;
    cfg.projection = ProjectionSet(zeros(2), 30.0);
    cfg.problem.noise_sigma = 0.1;
    cfg.scheduler.kind = "constant";
    cfg.scheduler.eta = 0.1;
    const RunTrace trace = run_online(cfg);
    for (int t = 1; t <= 9; ++t) {
        CHECK(trace.records[static_cast<std::size_t>(t - 1)].gamma ==
              doctest::Approx(gammas.at(t)).epsilon(1e-12));
    }
    CHECK(trace.records[9].gamma == 0.0);
}
