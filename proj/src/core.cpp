#include "shiftlab/core.hpp"

namespace shiftlab {

Vec project_ball(const Vec& x, const ProjectionSet& set) {
    check_same_dim(x, set.center);
    const double d = distance(x, set.center);
    if (d <= set.radius) return x;
    Vec r(x.size());
    const double s = set.radius / d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r[i] = set.center[i] + s * (x[i] - set.center[i]);
    }
    return r;
}

void ledger_append(RunTrace& trace, const StepRecord& rec) {
    const int expected = static_cast<int>(trace.records.size()) + 1;
    if (rec.t != expected) {
        throw std::invalid_argument("ledger_append: step index " + std::to_string(rec.t) +
                                    " out of order, expected " + std::to_string(expected));
    }
    const double prev = trace.cum_regret.empty() ? 0.0 : trace.cum_regret.back();
    trace.records.push_back(rec);
    trace.cum_regret.push_back(prev + rec.regret);
}

}  // namespace shiftlab
