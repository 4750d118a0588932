#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qi {

// Invalid input, bad config, violated precondition: CLI exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical/scientific failure (construction, tolerance, bound): CLI exit code 1.
struct science_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Pt {
    double x = 0.0, y = 0.0;
};

inline bool operator==(Pt a, Pt b) { return a.x == b.x && a.y == b.y; }

struct Vec {
    double x = 0.0, y = 0.0;
};

struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string index_str(int i, int j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

// Deterministic uniform double in [0,1) from a 64-bit generator state.
inline double uniform01(std::uint64_t bits) {
    return double(bits >> 11) * 0x1.0p-53;
}

}  // namespace qi
