#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biaslab {

/// 17 significant digits; non-finite values print as "nan", "inf" or "-inf".
std::string format_real(double value);

/// Accepts anything format_real writes. Throws std::runtime_error otherwise.
double parse_real(const std::string& text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws std::runtime_error if absent.
    std::size_t column(const std::string& name) const;
};

/// Plain comma-separated values without quoting. Every row must have as
/// many fields as the header.
CsvTable read_csv(std::istream& is);

}  // namespace biaslab
