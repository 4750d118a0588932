#pragma once

#include "qi/common.hpp"

namespace qi {

// Knot vector t_0..t_N with the double-end-knot conventions:
// h_0 = h_{N+1} = 0, s_0 = t_0, s_{N+1} = t_N, sigma_1 = 1, sigma_{N+1} = 0.
// sigp is stored as 1 - sig so the identity holds bit-exactly.
struct Partition1D {
    std::vector<double> knots;  // t_0..t_N
    std::vector<double> h;      // size N+2, h[0] = h[N+1] = 0
    std::vector<double> s;      // size N+2, interval midpoints, collapsed ends
    std::vector<double> sig;    // size N+2, index 0 unused
    std::vector<double> sigp;   // 1 - sig
    int N = 0;                  // cell count

    double a() const { return knots.front(); }
    double b() const { return knots.back(); }
};

inline Partition1D build_partition(const std::vector<double>& knots) {
    if (knots.size() < 3)
        throw config_error("partition needs at least 3 knots, got " +
                           std::to_string(knots.size()));
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw config_error("partition knots not strictly increasing at index " +
                               std::to_string(i));
    Partition1D p;
    p.knots = knots;
    p.N = int(knots.size()) - 1;
    const int N = p.N;
    p.h.assign(N + 2, 0.0);
    p.s.assign(N + 2, 0.0);
    p.sig.assign(N + 2, 0.0);
    p.sigp.assign(N + 2, 0.0);
    for (int i = 1; i <= N; ++i) {
        p.h[i] = knots[i] - knots[i - 1];
        p.s[i] = 0.5 * (knots[i - 1] + knots[i]);
    }
    p.s[0] = knots[0];
    p.s[N + 1] = knots[N];
    for (int i = 1; i <= N + 1; ++i) {
        p.sig[i] = p.h[i] / (p.h[i - 1] + p.h[i]);  // ends: 1 and 0 via h conventions
        p.sigp[i] = 1.0 - p.sig[i];
    }
    return p;
}

inline Partition1D uniform_partition(double a, double b, int cells) {
    if (cells < 2 || !(b > a)) throw config_error("uniform partition needs b > a and >= 2 cells");
    std::vector<double> t(cells + 1);
    for (int i = 0; i <= cells; ++i) t[i] = a + (b - a) * double(i) / double(cells);
    return build_partition(t);
}

}  // namespace qi
