#pragma once

#include <string>
#include <vector>

#include "shiftlab/core.hpp"
#include "shiftlab/paths.hpp"
#include "shiftlab/theory.hpp"

namespace shiftlab {

// Round-trip-safe, deterministic text form of a double.
std::string format_double(double x);

// trace.csv: t,eta,batch_size,dist,gamma,gamma_hat,regret,cum_regret,loss_est
void write_trace_csv(const std::string& path, const RunTrace& trace);

// path.csv: t,coord_1..coord_d
void write_path_csv(const std::string& path, const OraclePath& oracle);

// moments.csv: tau,m_norm,v
void write_moments_csv(const std::string& path, const MomentTrace& trace);

// schedule.csv: t,eta,gamma_in plus scheduler-specific diagnostic columns.
struct ScheduleTraceRow {
    int t = 0;
    double eta = 0.0;
    double gamma_in = 0.0;
    std::vector<double> extras;
};
void write_schedule_csv(const std::string& path, const std::vector<std::string>& extra_names,
                        const std::vector<ScheduleTraceRow>& rows);

// bounds.csv: t plus one increment column per provided series.
void write_bounds_csv(const std::string& path, const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& increment_series);

}  // namespace shiftlab
