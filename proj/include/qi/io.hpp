#pragma once

#include <cstdio>
#include <fstream>

#include "qi/common.hpp"

namespace qi {

// Write-then-rename so readers never observe a half-written file.
inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot write '" + tmp + "'");
        out << content;
        out.flush();
        if (!out) throw config_error("write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw config_error("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

// Points CSV: one header line, then x,y per record.
inline std::vector<Pt> read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open '" + path + "'");
    std::vector<Pt> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 || line.empty()) continue;  // header / trailing blank
        std::size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": expected exactly two comma-separated fields");
        auto num = [&](const std::string& s) {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                used = std::string::npos;
            }
            if (used != s.size())
                throw config_error(path + ":" + std::to_string(lineno) + ": bad number '" + s +
                                   "'");
            return v;
        };
        pts.push_back({num(line.substr(0, comma)), num(line.substr(comma + 1))});
    }
    return pts;
}

}  // namespace qi
