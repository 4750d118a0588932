#pragma once

#include "qi/partition.hpp"

namespace qi {

// Clamped (triple end knot) quadratic B-spline basis over a 1D partition:
// N+2 functions indexed 0..N+1, forming a partition of unity on [t_0, t_N].
// Cox-de Boor with the 0/0 := 0 convention; the last interval is closed.
inline double univariate_bspline(const Partition1D& p, int i, double x) {
    const int N = p.N;
    if (i < 0 || i > N + 1)
        throw config_error("univariate B-spline index " + std::to_string(i) + " out of range");
    if (!(x >= p.a() && x <= p.b()))
        throw config_error("point " + fmt17(x) + " outside [" + fmt17(p.a()) + "," +
                           fmt17(p.b()) + "]");
    // knots: t0,t0,t0, t1..t_{N-1}, tN,tN,tN   (N+5 values)
    auto u = [&](int k) -> double {
        if (k <= 2) return p.knots.front();
        if (k >= N + 2) return p.knots.back();
        return p.knots[k - 2];
    };
    const double xr = p.b();
    auto B0 = [&](int j) -> double {
        double lo = u(j), hi = u(j + 1);
        if (lo == hi) return 0.0;
        return ((lo <= x && x < hi) || (x == xr && hi == xr)) ? 1.0 : 0.0;
    };
    auto B1 = [&](int j) -> double {
        double v = 0.0;
        if (u(j + 1) != u(j)) v += (x - u(j)) / (u(j + 1) - u(j)) * B0(j);
        if (u(j + 2) != u(j + 1)) v += (u(j + 2) - x) / (u(j + 2) - u(j + 1)) * B0(j + 1);
        return v;
    };
    double v = 0.0;
    if (u(i + 2) != u(i)) v += (x - u(i)) / (u(i + 2) - u(i)) * B1(i);
    if (u(i + 3) != u(i + 1)) v += (u(i + 3) - x) / (u(i + 3) - u(i + 1)) * B1(i + 1);
    return v;
}

}  // namespace qi
