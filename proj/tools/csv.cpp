#include "csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nngp::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

} // namespace

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j] == name) return static_cast<int>(j);
    return -1;
}

int CsvTable::require_column(const std::string& name) const {
    const int idx = column_index(name);
    if (idx < 0) throw std::runtime_error("missing required column '" + name + "'");
    return idx;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    CsvTable table;
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": file is empty");
    ++line_no;
    table.columns = split_fields(line);
    if (table.columns.empty() || table.columns[0].empty())
        throw std::runtime_error(path + ":1: empty header row");

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != table.columns.size()) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected " << table.columns.size()
                << " fields but found " << fields.size();
            throw std::runtime_error(msg.str());
        }
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const char* text = fields[j].c_str();
            char* end = nullptr;
            row[j] = std::strtod(text, &end);
            if (end == text || *end != '\0') {
                std::ostringstream msg;
                msg << path << ":" << line_no << ": cannot parse '" << fields[j]
                    << "' in column " << table.columns[j];
                throw std::runtime_error(msg.str());
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty())
        throw std::runtime_error(path + ": no data rows");
    return table;
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (j > 0) out << ',';
        out << columns[j];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::runtime_error(path + ": row width does not match header");
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0) out << ',';
            out << format_double(row[j]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

} // namespace nngp::cli
