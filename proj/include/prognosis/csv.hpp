#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "prognosis/common.hpp"

namespace prognosis {

// In-memory CSV: header row plus string cells. Lines starting with '#'
// (provenance comments) are skipped on read; line_numbers keeps the
// 1-based source line of each data row for error reporting.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    int column(const std::string& name) const;           // -1 when absent
    int require_column(const std::string& name) const;   // throws SchemaError
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& path = "<memory>");

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::string& provenance = "");

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Strict numeric parse of a whole cell; nullopt for blank cells.
std::optional<double> parse_double_cell(const std::string& cell, const std::string& context);
std::optional<long long> parse_int_cell(const std::string& cell, const std::string& context);

}  // namespace prognosis
