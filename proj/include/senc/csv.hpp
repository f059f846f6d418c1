#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace senc::csv {

// Minimal reader for the toolkit's own files: comma separated, no quoting,
// '#' lines and blank lines skipped, first remaining line is the header.
class Table {
public:
    static Table read(std::istream& is);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }

    // Throws ConfigError if the column is missing.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;

    const std::string& cell(std::size_t row, std::size_t col) const;
    // Throws ConfigError on a malformed number.
    double number(std::size_t row, std::size_t col) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> split(std::string_view line, char sep = ',');

// Fixed-point formatting used by every CSV writer so output bytes are stable.
std::string fmt(double v, int precision = 6);

}  // namespace senc::csv
