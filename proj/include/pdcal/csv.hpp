#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace pdcal::csv {

struct Row {
    std::size_t line;
    std::vector<std::string> fields;
};

/// Splits a comma-separated line. Fields are trimmed; double-quoted fields may contain commas.
std::vector<std::string> split_line(std::string_view line);

/// Reads header plus data rows. Blank lines and lines starting with '#' are skipped.
/// Throws InputError on an empty stream.
struct Table {
    Row header;
    std::vector<Row> rows;
};
Table read_table(std::istream& in);

/// Parses a non-negative integer; InputError (with line) otherwise.
long long parse_count(const std::string& text, std::size_t line, std::string_view what);

/// Parses a finite double; InputError (with line) otherwise.
double parse_real(const std::string& text, std::size_t line, std::string_view what);

/// Shortest round-trippable decimal representation.
std::string format_real(double value);

}  // namespace pdcal::csv
