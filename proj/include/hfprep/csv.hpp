#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hfprep/error.hpp"

namespace hfprep {

// Minimal CSV: comma-separated, one header row, no quoting. Fields in
// this project (ids, paths, numbers) must not contain commas.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
    int require_column(const std::string& name, const std::string& file) const {
        const int c = column(name);
        if (c < 0)
            throw InvalidArgument("'" + file + "' is missing column '" + name + "'");
        return c;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            t.header = split_csv_line(line);
            first = false;
        } else {
            t.rows.push_back(split_csv_line(line));
        }
    }
    return t;
}

inline std::string join_csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

} // namespace hfprep
