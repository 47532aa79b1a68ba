#pragma once

#include <string>
#include <vector>

namespace sdr {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Numeric CSV with a single header row. Values are written with 17
/// significant digits so files round-trip bit exactly.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Throws CsvError naming the offending row on malformed input.
CsvTable read_csv(const std::string& path);

std::string format_double(double v);

}  // namespace sdr
