#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shiftlab/vec.hpp"

namespace shiftlab {

// Raised when a run produces non-finite quantities or a scheduler emits an
// invalid step size. The CLI maps this to exit code 3.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Euclidean ball of admissible model weights. Diameter 2*radius serves as
// D_max in the convex regret bounds.
struct ProjectionSet {
    Vec center;
    double radius = 1.0;

    ProjectionSet() = default;
    ProjectionSet(Vec c, double r) : center(std::move(c)), radius(r) {
        if (!(radius > 0.0)) throw std::invalid_argument("projection radius must be > 0");
    }

    double diameter() const { return 2.0 * radius; }
    bool contains(const Vec& x, double tol = 0.0) const {
        return distance(x, center) <= radius + tol;
    }
};

// Radial projection onto the ball. Identity for interior points.
Vec project_ball(const Vec& x, const ProjectionSet& set);

// Telemetry for one online step. `dist` is the tracking error against the
// oracle model at the start of the step, `dist_next` the error of the updated
// iterate against the next oracle model; both are simulator-side diagnostics.
struct StepRecord {
    int t = 0;              // 1-based step index
    double eta = 0.0;       // step size used
    int batch_size = 1;
    double dist = 0.0;      // ||theta*_t - theta_t||
    double dist_next = 0.0; // ||theta*_{t+1} - theta_{t+1}||
    double gamma = 0.0;     // shift magnitude between steps t and t+1 (0 at t = T)
    double gamma_hat = 0.0; // EMA shift estimate available to the scheduler at step t
    double regret = 0.0;    // per-step regret (or squared gradient norm)
    double inner_shift = 0.0; // <theta*_t - theta*_{t+1}, theta_{t+1} - theta*_t>
    double loss_est = 0.0;  // estimate of the expected loss at theta_t
};

// Append-only run ledger with running regret sums.
struct RunTrace {
    std::vector<StepRecord> records;
    std::vector<double> cum_regret;
    long projection_bind_count = 0;  // steps where the ball projection was active
    std::vector<Vec> iterates;       // theta_1..theta_{T+1}, only when captured

    double total_regret() const { return cum_regret.empty() ? 0.0 : cum_regret.back(); }
    int steps() const { return static_cast<int>(records.size()); }
};

// Appends `rec` to the trace; rec.t must be the next 1-based index.
void ledger_append(RunTrace& trace, const StepRecord& rec);

}  // namespace shiftlab
