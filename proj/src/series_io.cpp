#include "shipnet/series_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace shipnet {

std::string format_time_s(SimTime t) {
    const long long us = t.count();
    char buf[48];
    const char* sign = us < 0 ? "-" : "";
    const long long a = us < 0 ? -us : us;
    std::snprintf(buf, sizeof buf, "%s%lld.%06lld", sign, a / 1'000'000, a % 1'000'000);
    return buf;
}

void write_series_csv(std::ostream& out, const std::vector<std::string>& labels,
                      const std::vector<TimeSeries>& series) {
    if (labels.size() != series.size()) throw std::invalid_argument("one label per series required");
    out << "time_s";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    if (series.empty()) return;
    const auto n = series.front().size();
    for (const auto& s : series)
        if (s.size() != n || s.t0 != series.front().t0 || s.dt != series.front().dt)
            throw std::invalid_argument("series must share one time grid");
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        out << format_time_s(series.front().time_at(i));
        for (const auto& s : series) {
            std::snprintf(buf, sizeof buf, ",%.17g", s.values[i]);
            out << buf;
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

SimTime parse_time_s(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError("bad time value '" + s + "'");
    return Micros{std::llround(v * 1e6)};
}

}  // namespace

SeriesTable read_series_csv(std::istream& in) {
    SeriesTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("series CSV is empty");
    auto header = split_csv(line);
    if (header.empty() || header[0] != "time_s") throw ConfigError("series CSV must start with a time_s column");
    t.labels.assign(header.begin() + 1, header.end());
    t.series.resize(t.labels.size());
    std::vector<SimTime> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != header.size()) throw ConfigError("series CSV row has wrong column count: '" + line + "'");
        times.push_back(parse_time_s(cells[0]));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (end == cells[c].c_str() || *end != '\0') throw ConfigError("bad value '" + cells[c] + "'");
            t.series[c - 1].values.push_back(v);
        }
    }
    if (times.empty()) throw ConfigError("series CSV has no rows");
    const Micros dt = times.size() > 1 ? times[1] - times[0] : Micros{1};
    if (dt.count() <= 0) throw ConfigError("series CSV time column is not increasing");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] - times[i - 1] != dt) throw ConfigError("series CSV time column is not uniform");
    for (auto& s : t.series) {
        s.t0 = times[0];
        s.dt = dt;
    }
    return t;
}

}  // namespace shipnet
