#include "pdcal/csv.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "pdcal/error.hpp"

namespace pdcal::csv {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

Table read_table(std::istream& in) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        if (!have_header) {
            // Tolerate a UTF-8 byte-order mark on the header.
            std::string_view view = stripped;
            if (view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
            table.header = {line_no, split_line(view)};
            have_header = true;
        } else {
            table.rows.push_back({line_no, split_line(stripped)});
        }
    }
    if (!have_header) throw InputError("empty CSV input (no header)");
    return table;
}

long long parse_count(const std::string& text, std::size_t line, std::string_view what) {
    long long value = 0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || value < 0) {
        throw InputError("invalid " + std::string(what) + " '" + text +
                             "' (expected non-negative integer)",
                         line);
    }
    return value;
}

double parse_real(const std::string& text, std::size_t line, std::string_view what) {
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw InputError("invalid " + std::string(what) + " '" + text + "' (expected number)",
                         line);
    }
    return value;
}

std::string format_real(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

}  // namespace pdcal::csv
