#include "prognosis/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace prognosis {

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& path,
                                    std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            if (!cur.empty())
                throw SchemaError(path + ":" + std::to_string(line_no) + ": stray quote in field");
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted)
        throw SchemaError(path + ":" + std::to_string(line_no) + ": unterminated quoted field");
    fields.push_back(cur);
    return fields;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n") != std::string::npos;
}

std::string quote_field(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require_column(const std::string& name) const {
    int idx = column(name);
    if (idx < 0) throw SchemaError(path + ": missing required column '" + name + "'");
    return idx;
}

CsvTable parse_csv(const std::string& text, const std::string& path) {
    CsvTable table;
    table.path = path;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') continue;
        auto fields = split_line(line, path, line_no);
        if (!saw_header) {
            table.header = std::move(fields);
            saw_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw SchemaError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(table.header.size()) + " fields, got " +
                              std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!saw_header) throw SchemaError(path + ": empty file (no header row)");
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::string& provenance) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path + ": cannot open file for writing");
    if (!provenance.empty()) out << "# " << provenance << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << quote_field(header[i]);
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << quote_field(row[i]);
        }
        out << '\n';
    }
    if (!out) throw Error(path + ": write failed");
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_double_cell(const std::string& cell, const std::string& context) {
    if (cell.empty()) return std::nullopt;
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end != begin + cell.size() || errno == ERANGE)
        throw SchemaError(context + ": not a number: '" + cell + "'");
    return v;
}

std::optional<long long> parse_int_cell(const std::string& cell, const std::string& context) {
    if (cell.empty()) return std::nullopt;
    long long v = 0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw SchemaError(context + ": not an integer: '" + cell + "'");
    return v;
}

}  // namespace prognosis
