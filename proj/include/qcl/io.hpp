#pragma once

#include <string>
#include <vector>

#include "qcl/diagnostics.hpp"
#include "qcl/sse.hpp"

namespace qcl {

/// Column order of every tracker file.
inline const std::vector<std::string> kTrackerColumns = {"t", "x", "p", "v_x", "v_p", "c_xp",
                                                         "k_xxx", "k_xxp", "k_xpp"};

/// Doubles are written with 17 significant digits so files round-trip exactly.
std::string format_number(double v);

void write_tracker_csv(const std::string& path, const CumulantSeries& series);
CumulantSeries read_tracker_csv(const std::string& path);

/// Columns t, dr_1..dr_N. Row i holds the increments over [t_i, t_i + dt).
void write_records_csv(const std::string& path, const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> read_records_csv(const std::string& path);

/// Generic numeric table with a header row.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
void write_table_csv(const std::string& path, const Table& table);
Table read_table_csv(const std::string& path);

void write_text(const std::string& path, const std::string& content);

}  // namespace qcl
