#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "shipnet/metrics.hpp"

namespace shipnet {

// time_s,<label1>,<label2>,... with times written as exact microseconds
// ("%.6f") and values with 17 significant digits, so re-reading reproduces
// the in-memory series bit for bit.
void write_series_csv(std::ostream& out, const std::vector<std::string>& labels, const std::vector<TimeSeries>& series);

struct SeriesTable {
    std::vector<std::string> labels;
    std::vector<TimeSeries> series;
};

// Throws ConfigError on malformed input or a non-uniform time column.
SeriesTable read_series_csv(std::istream& in);

std::string format_time_s(SimTime t);

}  // namespace shipnet
