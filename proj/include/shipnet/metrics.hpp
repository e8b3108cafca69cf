#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "shipnet/common.hpp"
#include "shipnet/kernels.hpp"

namespace shipnet {

// Uniformly sampled signal: values[i] is the sample at t0 + i*dt.
struct TimeSeries {
    SimTime t0{0};
    Micros dt{1};
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    SimTime end() const { return t0 + dt * static_cast<std::int64_t>(values.empty() ? 0 : values.size() - 1); }
    SimTime time_at(std::size_t i) const { return t0 + dt * static_cast<std::int64_t>(i); }
};

class NoOverlap : public Error {
public:
    using Error::Error;
};

class ZeroReferenceSample : public Error {
public:
    explicit ZeroReferenceSample(std::size_t index)
        : Error("reference sample " + std::to_string(index) + " is zero"), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class ZeroMidpointSample : public Error {
public:
    explicit ZeroMidpointSample(std::size_t index)
        : Error("samples at index " + std::to_string(index) + " sum to zero"), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class LabelMismatch : public Error {
public:
    using Error::Error;
};

// Resamples both series onto the coarser dt over their common interval by
// zero-order hold. Identical grids come back unchanged.
std::pair<TimeSeries, TimeSeries> align(const TimeSeries& a, const TimeSeries& b);

// Mean absolute percentage error of x2 against the reference x1, in percent.
double mape(const TimeSeries& x1, const TimeSeries& x2, Exec exec = Exec::Parallel);

// Mean of the per-sample percentage difference (x1-x2)/((x1+x2)/2)*100.
double avg_pd(const TimeSeries& x1, const TimeSeries& x2, Exec exec = Exec::Parallel);

// Mean of |PD_i|; reported next to avg_pd.
double avg_abs_pd(const TimeSeries& x1, const TimeSeries& x2, Exec exec = Exec::Parallel);

// A set of labelled signals from one run (e.g. five ESM SOC traces).
struct RunBundle {
    std::string scenario;
    std::string run_id;
    std::vector<std::string> labels;
    std::vector<TimeSeries> series;
};

struct ComparisonRow {
    std::string scenario;
    std::string comparison;
    std::string label;
    double mape_pct = 0.0;
    double avg_pd_pct = 0.0;
    double avg_abs_pd_pct = 0.0;
    std::size_t n = 0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
};

// Compares runs[reference] against every other run, signal by signal.
// Throws LabelMismatch when bundles disagree on labels.
ComparisonReport compare_runs(const std::vector<RunBundle>& runs, std::size_t reference = 0);

inline constexpr const char* kReportHeader = "scenario,comparison,esm,mape_pct,avg_pd_pct,avg_abs_pd_pct,n";
void write_report_csv(std::ostream& out, const ComparisonReport& report, bool header = true);
void write_report_table(std::ostream& out, const ComparisonReport& report);

}  // namespace shipnet
