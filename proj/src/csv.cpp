#include "senc/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>

#include "senc/errors.hpp"

namespace senc::csv {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

Table Table::read(std::istream& is) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        auto fields = split(s);
        if (t.header_.empty()) {
            t.header_ = std::move(fields);
            continue;
        }
        if (fields.size() != t.header_.size())
            throw ConfigError("csv line " + std::to_string(lineno) + ": expected " +
                              std::to_string(t.header_.size()) + " fields, got " + std::to_string(fields.size()));
        t.rows_.push_back(std::move(fields));
    }
    if (t.header_.empty()) throw ConfigError("csv: missing header row");
    return t;
}

bool Table::has_column(std::string_view name) const {
    for (const auto& h : header_)
        if (h == name) return true;
    return false;
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw ConfigError("csv: missing column '" + std::string(name) + "'");
}

const std::string& Table::cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

double Table::number(std::size_t row, std::size_t col) const {
    const std::string& s = cell(row, col);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("csv: row " + std::to_string(row + 1) + " column '" + header_.at(col) +
                          "' is not a number: '" + s + "'");
    return v;
}

std::string fmt(double v, int precision) {
    if (v == 0.0) v = 0.0;  // drop negative zero
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

}  // namespace senc::csv
