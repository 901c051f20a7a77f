#include "qcl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qcl/error.hpp"

namespace qcl {

std::string format_number(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

void write_table_csv(const std::string& path, const Table& table) {
    std::string s;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) s += ',';
        s += table.columns[i];
    }
    s += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw std::logic_error("row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            s += format_number(row[i]);
        }
        s += '\n';
    }
    write_text(path, s);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

double parse_number(const std::string& s, const std::string& path) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("bad number '" + s + "' in " + path);
    return v;
}

}  // namespace

Table read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV file " + path);
    t.columns = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.columns.size()) throw ConfigError("ragged row in " + path);
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_number(c, path));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_tracker_csv(const std::string& path, const CumulantSeries& series) {
    Table t{kTrackerColumns, {}};
    t.rows.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& c = series.c[i];
        t.rows.push_back({series.t[i], c.x, c.p, c.v_x, c.v_p, c.c_xp, c.k_xxx, c.k_xxp, c.k_xpp});
    }
    write_table_csv(path, t);
}

CumulantSeries read_tracker_csv(const std::string& path) {
    Table t = read_table_csv(path);
    if (t.columns != kTrackerColumns) throw ConfigError("unexpected tracker columns in " + path);
    CumulantSeries s;
    for (const auto& r : t.rows) {
        Cumulants c;
        c.x = r[1];
        c.p = r[2];
        c.v_x = r[3];
        c.v_p = r[4];
        c.c_xp = r[5];
        c.k_xxx = r[6];
        c.k_xxp = r[7];
        c.k_xpp = r[8];
        s.push(r[0], c);
    }
    return s;
}

void write_records_csv(const std::string& path, const std::vector<MeasurementRecord>& records) {
    Table t;
    t.columns.push_back("t");
    for (std::size_t i = 0; i < records.size(); ++i) t.columns.push_back("dr_" + std::to_string(i + 1));
    const std::size_t n = records.empty() ? 0 : records.front().size();
    for (const auto& r : records)
        if (r.size() != n || r.dt != records.front().dt) throw std::logic_error("records must share a time grid");
    t.rows.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> row{double(s) * records.front().dt};
        for (const auto& r : records) row.push_back(r.increments[s]);
        t.rows.push_back(std::move(row));
    }
    write_table_csv(path, t);
}

std::vector<MeasurementRecord> read_records_csv(const std::string& path) {
    Table t = read_table_csv(path);
    if (t.columns.empty() || t.columns[0] != "t") throw ConfigError("records file must start with a t column");
    for (std::size_t i = 1; i < t.columns.size(); ++i)
        if (t.columns[i] != "dr_" + std::to_string(i)) throw ConfigError("unexpected record column " + t.columns[i]);
    if (t.rows.size() < 2) throw ConfigError("records file needs at least two rows to infer dt");
    const double dt = t.rows[1][0] - t.rows[0][0];
    if (!(dt > 0.0)) throw ConfigError("record times must increase");
    for (std::size_t s = 1; s < t.rows.size(); ++s)
        if (std::abs((t.rows[s][0] - t.rows[0][0]) - double(s) * dt) > 1e-6 * dt)
            throw ConfigError("record times are not uniformly spaced");
    std::vector<MeasurementRecord> out;
    for (std::size_t i = 1; i < t.columns.size(); ++i) {
        MeasurementRecord r{dt, {}, i - 1};
        r.increments.reserve(t.rows.size());
        for (const auto& row : t.rows) r.increments.push_back(row[i]);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace qcl
