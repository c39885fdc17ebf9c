#include "vmt/output.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vmt/errors.hpp"

namespace vmt {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << t.columns[i] << (i + 1 < t.columns.size() ? "," : "");
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
        os << "\n";
    }
    return os.str();
}

std::string to_json_string(const Table& t) {
    nlohmann::json j;
    j["name"] = t.name;
    nlohmann::json meta;
    for (const auto& [k, v] : t.metadata) meta[k] = v;
    j["metadata"] = meta;
    j["columns"] = t.columns;
    j["rows"] = t.rows;
    return j.dump(2) + "\n";
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open output file: " + path);
    os << text;
    if (!os) throw ValidationError("failed writing output file: " + path);
}

void write_table(const Table& t, const std::string& path, bool json) {
    write_text(json ? to_json_string(t) : to_csv(t), path);
}

Table read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open csv file: " + path);
    Table t;
    std::string line;
    bool header_done = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos)
                t.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (!header_done) {
            while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
            header_done = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{})
                throw ValidationError("csv parse error at '" + cell + "' in " + path);
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace vmt
