#pragma once

#include <string>
#include <vector>

namespace nngp::cli {

/// Numeric table with named columns.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Index of a named column, -1 when absent.
    int column_index(const std::string& name) const;
    /// Index of a named column; throws when absent.
    int require_column(const std::string& name) const;
};

/// Reads a header-row CSV of doubles; parse errors carry path and line number.
CsvTable read_csv(const std::string& path);

/// Decimal rendering with 17 significant digits; round-trips doubles exactly.
std::string format_double(double value);

/// Writes a header row and numeric rows using format_double.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

} // namespace nngp::cli
