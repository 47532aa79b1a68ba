#include "sdr/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sdr/errors.hpp"

namespace sdr {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw CsvError("row width does not match header in " + path);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
    if (!out) throw CsvError("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open: " + path);

    CsvTable table;
    std::string line;
    int lineno = 0;

    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                parts.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        parts.push_back(cur);
        return parts;
    };

    if (!std::getline(in, line)) throw CsvError(path + ": empty file");
    ++lineno;
    table.header = split(line);

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto parts = split(line);
        if (parts.size() != table.header.size()) {
            std::ostringstream msg;
            msg << path << ": row " << lineno << ": expected " << table.header.size()
                << " columns, got " << parts.size();
            throw CsvError(msg.str());
        }
        std::vector<double> row;
        row.reserve(parts.size());
        for (std::size_t i = 0; i < parts.size(); ++i) {
            try {
                std::size_t used = 0;
                const double v = std::stod(parts[i], &used);
                if (used != parts[i].size()) throw std::invalid_argument("trailing garbage");
                row.push_back(v);
            } catch (const std::exception&) {
                std::ostringstream msg;
                msg << path << ": row " << lineno << ": column '" << table.header[i]
                    << "': cannot parse '" << parts[i] << "' as a number";
                throw CsvError(msg.str());
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace sdr
