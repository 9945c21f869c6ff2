#pragma once

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "geometry.hpp"
#include "pattern.hpp"

namespace ppapprox {

/// Pattern file: `# ppapprox-pattern D1=.. D2=.. T=.. w=..`, then one point per line.
struct PatternFile {
    int d1 = 1;
    int d2 = 1;
    double T = 1.0;
    double w = 1.0;
    PointPattern pattern;
};

inline void write_pattern(std::ostream& os, const PatternFile& f) {
    os << "# ppapprox-pattern D1=" << f.d1 << " D2=" << f.d2 << std::setprecision(17) << " T=" << f.T
       << " w=" << f.w << "\n";
    for (std::size_t i = 0; i < f.pattern.size(); ++i) {
        const auto x = f.pattern[i];
        for (std::size_t d = 0; d < x.size(); ++d) os << (d ? " " : "") << x[d];
        os << "\n";
    }
}

inline PatternFile read_pattern(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("pattern file: missing header");
    std::istringstream hs(line);
    std::string hash, tag;
    hs >> hash >> tag;
    if (hash != "#" || tag != "ppapprox-pattern") throw std::runtime_error("pattern file: bad header");
    PatternFile f;
    bool seen[4] = {false, false, false, false};
    for (std::string kv; hs >> kv;) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("pattern file: malformed header field '" + kv + "'");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        try {
            if (key == "D1") f.d1 = std::stoi(val), seen[0] = true;
            else if (key == "D2") f.d2 = std::stoi(val), seen[1] = true;
            else if (key == "T") f.T = std::stod(val), seen[2] = true;
            else if (key == "w") f.w = std::stod(val), seen[3] = true;
            else throw std::runtime_error("pattern file: unknown header field '" + key + "'");
        } catch (const std::logic_error&) {
            throw std::runtime_error("pattern file: bad value in header field '" + kv + "'");
        }
    }
    if (!(seen[0] && seen[1] && seen[2] && seen[3])) throw std::runtime_error("pattern file: header needs D1, D2, T, w");
    if (f.d1 < 1 || f.d2 < 1) throw std::runtime_error("pattern file: D1 and D2 must be >= 1");
    const std::size_t D = static_cast<std::size_t>(f.d1 + f.d2);
    f.pattern = PointPattern(D);
    Point x(D);
    for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::size_t k = 0;
        for (double v; ls >> v;) {
            if (k == D) throw std::runtime_error("pattern file line " + std::to_string(lineno) + ": too many coordinates");
            x[k++] = v;
        }
        if (k != D || !ls.eof())
            throw std::runtime_error("pattern file line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(D) + " numbers");
        require_finite(x);
        f.pattern.push_back(x);
    }
    return f;
}

inline PatternFile load_pattern(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pattern file " + path);
    return read_pattern(in);
}

inline void save_pattern(const std::string& path, const PatternFile& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write pattern file " + path);
    write_pattern(out, f);
}

}  // namespace ppapprox
