#include "shiftlab/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace shiftlab {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps artifacts byte-stable
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
    auto out = open_out(path);
    out << "# shiftlab-trace-v1\n";
    out << "t,eta,batch_size,dist,gamma,gamma_hat,regret,cum_regret,loss_est\n";
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const StepRecord& r = trace.records[i];
        out << r.t << ',' << format_double(r.eta) << ',' << r.batch_size << ','
            << format_double(r.dist) << ',' << format_double(r.gamma) << ','
            << format_double(r.gamma_hat) << ',' << format_double(r.regret) << ','
            << format_double(trace.cum_regret[i]) << ',' << format_double(r.loss_est) << '\n';
    }
}

void write_path_csv(const std::string& path, const OraclePath& oracle) {
    auto out = open_out(path);
    out << "# shiftlab-path-v1\n";
    out << "t";
    for (int i = 1; i <= oracle.dim(); ++i) out << ",coord_" << i;
    out << '\n';
    for (int t = 1; t <= oracle.horizon(); ++t) {
        out << t;
        for (double c : oracle.at(t)) out << ',' << format_double(c);
        out << '\n';
    }
}

void write_moments_csv(const std::string& path, const MomentTrace& trace) {
    auto out = open_out(path);
    out << "# shiftlab-moments-v1\n";
    out << "tau,m_norm,v\n";
    for (std::size_t i = 0; i < trace.taus.size(); ++i) {
        out << format_double(trace.taus[i]) << ',' << format_double(norm(trace.m[i])) << ','
            << format_double(trace.v[i]) << '\n';
    }
}

void write_schedule_csv(const std::string& path, const std::vector<std::string>& extra_names,
                        const std::vector<ScheduleTraceRow>& rows) {
    auto out = open_out(path);
    out << "# shiftlab-schedule-v1\n";
    out << "t,eta,gamma_in";
    for (const auto& n : extra_names) out << ',' << n;
    out << '\n';
    for (const auto& r : rows) {
        out << r.t << ',' << format_double(r.eta) << ',' << format_double(r.gamma_in);
        for (double e : r.extras) out << ',' << format_double(e);
        out << '\n';
    }
}

void write_bounds_csv(const std::string& path, const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& increment_series) {
    auto out = open_out(path);
    out << "# shiftlab-bounds-v1\n";
    out << "t";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    std::size_t rows = 0;
    for (const auto& s : increment_series) rows = std::max(rows, s.size());
    for (std::size_t i = 0; i < rows; ++i) {
        out << (i + 1);
        for (const auto& s : increment_series) {
            out << ',';
            if (i < s.size()) out << format_double(s[i]);
        }
        out << '\n';
    }
}

}  // namespace shiftlab
