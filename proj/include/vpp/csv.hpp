#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vpp/ode.hpp"

namespace vpp {

/// Writes a time series with a header line, a units comment, and the channels
/// in their stored order, prefixed by the time channel. Numbers use full
/// round-trip precision, locale independent.
void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& ts,
                          const std::string& units_comment =
                              "# units: s, rpm, deg, rpm, deg, N");

/// Reads a CSV written by write_timeseries_csv (or compatible): header naming
/// channels including 't', '#' comment lines anywhere, strictly uniform time
/// spacing.
TimeSeries read_timeseries_csv(const std::filesystem::path& path);

/// Plain numeric table with a header line (for grids, reports, curves).
void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;
};

Table read_table_csv(const std::filesystem::path& path);

/// Full round-trip formatting of a double (shortest representation that
/// parses back exactly).
std::string format_double(double v);

}  // namespace vpp
