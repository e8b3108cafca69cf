#include "shipnet/metrics.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace shipnet {

namespace {

TimeSeries hold_resample(const TimeSeries& s, SimTime start, Micros dt, std::size_t n) {
    TimeSeries out{start, dt, {}};
    out.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const SimTime t = start + dt * static_cast<std::int64_t>(k);
        const auto idx = static_cast<std::size_t>((t - s.t0) / s.dt);
        out.values.push_back(s.values[std::min(idx, s.values.size() - 1)]);
    }
    return out;
}

void require_same_length(const TimeSeries& a, const TimeSeries& b) {
    if (a.size() != b.size()) throw std::invalid_argument("series lengths differ; align() them first");
    if (a.size() == 0) throw std::invalid_argument("series are empty");
}

}  // namespace

std::pair<TimeSeries, TimeSeries> align(const TimeSeries& a, const TimeSeries& b) {
    if (a.dt.count() <= 0 || b.dt.count() <= 0) throw std::invalid_argument("dt must be positive");
    if (a.values.empty() || b.values.empty()) throw NoOverlap("empty series");
    if (a.t0 == b.t0 && a.dt == b.dt && a.size() == b.size()) return {a, b};

    const SimTime start = std::max(a.t0, b.t0);
    const SimTime stop = std::min(a.end(), b.end());
    if (start > stop) throw NoOverlap("series do not overlap in time");
    const Micros dt = std::max(a.dt, b.dt);
    const auto n = static_cast<std::size_t>((stop - start) / dt) + 1;
    return {hold_resample(a, start, dt, n), hold_resample(b, start, dt, n)};
}

double mape(const TimeSeries& x1, const TimeSeries& x2, Exec exec) {
    require_same_length(x1, x2);
    const auto& r = x1.values;
    const auto& c = x2.values;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] == 0.0) throw ZeroReferenceSample(i);
    const double s = sum_terms(r.size(), [&](std::size_t i) { return std::fabs((r[i] - c[i]) / r[i]); }, exec);
    return s / static_cast<double>(r.size()) * 100.0;
}

namespace {

template <bool Absolute>
double pd_mean(const TimeSeries& x1, const TimeSeries& x2, Exec exec) {
    require_same_length(x1, x2);
    const auto& a = x1.values;
    const auto& b = x2.values;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] + b[i] == 0.0) throw ZeroMidpointSample(i);
    const double s = sum_terms(
        a.size(),
        [&](std::size_t i) {
            const double pd = (a[i] - b[i]) / (0.5 * (a[i] + b[i]));
            return Absolute ? std::fabs(pd) : pd;
        },
        exec);
    return s / static_cast<double>(a.size()) * 100.0;
}

}  // namespace

double avg_pd(const TimeSeries& x1, const TimeSeries& x2, Exec exec) { return pd_mean<false>(x1, x2, exec); }

double avg_abs_pd(const TimeSeries& x1, const TimeSeries& x2, Exec exec) { return pd_mean<true>(x1, x2, exec); }

ComparisonReport compare_runs(const std::vector<RunBundle>& runs, std::size_t reference) {
    if (reference >= runs.size()) throw std::invalid_argument("reference run index out of range");
    const auto& ref = runs[reference];
    for (const auto& r : runs) {
        if (r.labels != ref.labels)
            throw LabelMismatch("run '" + r.run_id + "' labels do not match reference run '" + ref.run_id + "'");
        if (r.series.size() != r.labels.size())
            throw LabelMismatch("run '" + r.run_id + "' has " + std::to_string(r.series.size()) + " series for " +
                                std::to_string(r.labels.size()) + " labels");
    }
    ComparisonReport report;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        if (k == reference) continue;
        const auto& other = runs[k];
        const std::string scenario = ref.scenario == other.scenario ? ref.scenario : ref.scenario + " vs " + other.scenario;
        const std::string comparison = ref.run_id + " vs " + other.run_id;
        for (std::size_t s = 0; s < ref.labels.size(); ++s) {
            const auto [a, b] = align(ref.series[s], other.series[s]);
            report.rows.push_back(ComparisonRow{scenario, comparison, ref.labels[s], mape(a, b), avg_pd(a, b),
                                                avg_abs_pd(a, b), a.size()});
        }
    }
    return report;
}

void write_report_csv(std::ostream& out, const ComparisonReport& report, bool header) {
    if (header) out << kReportHeader << '\n';
    char buf[128];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%zu", r.mape_pct, r.avg_pd_pct, r.avg_abs_pd_pct, r.n);
        out << r.scenario << ',' << r.comparison << ',' << r.label << ',' << buf << '\n';
    }
}

void write_report_table(std::ostream& out, const ComparisonReport& report) {
    std::size_t w_scn = 8, w_cmp = 10;
    for (const auto& r : report.rows) {
        w_scn = std::max(w_scn, r.scenario.size());
        w_cmp = std::max(w_cmp, r.comparison.size());
    }
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s  %-*s  %-6s  %10s  %12s  %13s\n", static_cast<int>(w_scn), "Scenario",
                  static_cast<int>(w_cmp), "Comparison", "SOC", "MAPE (%)", "Avg. PD (%)", "Avg. |PD| (%)");
    out << buf;
    std::string prev;
    for (const auto& r : report.rows) {
        const std::string key = r.scenario + "|" + r.comparison;
        const bool first = key != prev;
        if (first && !prev.empty()) out << '\n';
        prev = key;
        std::snprintf(buf, sizeof buf, "%-*s  %-*s  %-6s  %10.6f  %12.6f  %13.6f\n", static_cast<int>(w_scn),
                      first ? r.scenario.c_str() : "", static_cast<int>(w_cmp), first ? r.comparison.c_str() : "",
                      r.label.c_str(), r.mape_pct, r.avg_pd_pct, r.avg_abs_pd_pct);
        out << buf;
    }
}

}  // namespace shipnet
