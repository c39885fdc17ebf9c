#pragma once

#include <string>
#include <vector>

namespace vmt {

// Flat numeric table with '#' comment metadata; the common denominator of
// every command's output. CSV numbers use the shortest round-trip decimal
// form, so emitted files parse back bit-exactly.
struct Table {
    std::string name;
    std::vector<std::pair<std::string, std::string>> metadata;  // key/value comments
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_double(double v);  // shortest round-trip decimal

std::string to_csv(const Table& t);
std::string to_json_string(const Table& t);

void write_table(const Table& t, const std::string& path, bool json);
void write_text(const std::string& text, const std::string& path);

// Parses a CSV produced by to_csv (comments + header + numeric rows).
Table read_csv(const std::string& path);

} // namespace vmt
