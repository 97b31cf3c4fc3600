#include "vpp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vpp {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
    double v{};
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{})
        throw DataError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    return out;
}

}  // namespace

void write_timeseries_csv(const std::filesystem::path& path, const TimeSeries& ts,
                          const std::string& units_comment) {
    ts.check_lengths();
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");

    out << "t";
    for (const auto& name : ts.names()) out << "," << name;
    out << "\n";
    if (!units_comment.empty()) out << units_comment << "\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << format_double(ts.grid().time(i));
        for (const auto& name : ts.names()) out << "," << format_double(ts.at(name)[i]);
        out << "\n";
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
    const Table table = read_table_csv(path);
    if (table.header.empty() || table.header.front() != "t")
        throw DataError(path.string() + ": first column must be 't'");
    if (table.rows.size() < 2) throw DataError(path.string() + ": need at least two samples");

    const auto& first = table.rows.front();
    const double t0 = first.at(0);
    const double dt = table.rows[1].at(0) - t0;
    if (dt <= 0.0) throw DataError(path.string() + ": time channel must increase");
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        const double expect = t0 + dt * static_cast<double>(i);
        if (std::abs(table.rows[i].at(0) - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
            throw DataError(path.string() + ": non-uniform time spacing near row " +
                            std::to_string(i + 1));
    }

    TimeSeries ts(TimeGrid{dt, table.rows.size(), t0});
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        auto& col = ts.add(table.header[c]);
        for (const auto& row : table.rows) col.push_back(row.at(c));
    }
    ts.check_lengths();
    return ts;
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw DataError("table row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Table read_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line);
        if (fields.empty()) continue;
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f, path, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw DataError(path.string() + ": missing header line");
    return table;
}

std::vector<double> Table::column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != name) continue;
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& row : rows) out.push_back(row.at(c));
        return out;
    }
    throw DataError("table has no column '" + name + "'");
}

}  // namespace vpp
