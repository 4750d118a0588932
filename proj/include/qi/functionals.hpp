#pragma once

#include "qi/mesh.hpp"

namespace qi {

// Discrete coefficient functional: weighted point evaluations inside the domain.
struct Functional {
    int i = 0, j = 0;
    std::vector<std::pair<Pt, double>> sites;

    double operator()(const std::function<double(Pt)>& f) const {
        double v = 0.0;
        for (const auto& [pt, w] : sites) v += w * f(pt);
        return v;
    }
};

// Cross-stencil weights a_i, c_i (x direction) and abar_j, cbar_j (y direction);
// b_ij = 1 - (a_i + c_i + abar_j + cbar_j).  All four families carry the minus
// sign; ends are zero by the h conventions.
struct S2Coefficients {
    std::vector<double> a, c;        // size m+2
    std::vector<double> abar, cbar;  // size n+2

    double b(int i, int j) const { return 1.0 - (a[i] + c[i] + abar[j] + cbar[j]); }
};

namespace detail {

inline void s2_weights_1d(const Partition1D& p, std::vector<double>& a, std::vector<double>& c) {
    const int N = p.N;
    a.assign(N + 2, 0.0);
    c.assign(N + 2, 0.0);
    for (int i = 1; i <= N; ++i) {
        const double den = p.sig[i] + p.sigp[i + 1];
        a[i] = -p.sig[i] * p.sig[i] * p.sigp[i + 1] / den;
        c[i] = -p.sig[i] * p.sigp[i + 1] * p.sigp[i + 1] / den;
    }
}

}  // namespace detail

inline S2Coefficients s2_coefficients(const CrissCrossMesh& M) {
    S2Coefficients C;
    detail::s2_weights_1d(M.px, C.a, C.c);
    detail::s2_weights_1d(M.py, C.abar, C.cbar);
    return C;
}

inline void check_index(const CrissCrossMesh& M, int i, int j) {
    if (i < 0 || i > M.m + 1 || j < 0 || j > M.n + 1)
        throw config_error("index " + index_str(i, j) + " outside 0.." + std::to_string(M.m + 1) +
                           " x 0.." + std::to_string(M.n + 1));
}

// Five-site cross functional at the cell centers; zero-weight sites dropped
// before their coordinates are formed.
inline Functional s2_functional(const CrissCrossMesh& M, const S2Coefficients& C, int i, int j) {
    check_index(M, i, j);
    Functional F{i, j, {}};
    const double w[5] = {C.b(i, j), C.a[i], C.c[i], C.abar[j], C.cbar[j]};
    const int di[5] = {0, -1, 1, 0, 0};
    const int dj[5] = {0, 0, 0, -1, 1};
    for (int k = 0; k < 5; ++k)
        if (w[k] != 0.0) F.sites.emplace_back(M.center(i + di[k], j + dj[k]), w[k]);
    return F;
}

// Center site with weight 2 minus a quarter of the four index-clamped vertices;
// coincident sites aggregated, zero aggregates dropped.
inline Functional w2star_functional(const CrissCrossMesh& M, int i, int j) {
    check_index(M, i, j);
    auto clamped_vertex = [&](int ii, int jj) {
        return M.vertex(std::min(std::max(ii, 0), M.m), std::min(std::max(jj, 0), M.n));
    };
    std::vector<std::pair<Pt, double>> raw = {{M.center(i, j), 2.0},
                                              {clamped_vertex(i - 1, j - 1), -0.25},
                                              {clamped_vertex(i - 1, j), -0.25},
                                              {clamped_vertex(i, j - 1), -0.25},
                                              {clamped_vertex(i, j), -0.25}};
    Functional F{i, j, {}};
    for (const auto& [pt, w] : raw) {
        bool merged = false;
        for (auto& [qt, wq] : F.sites)
            if (qt == pt) {
                wq += w;
                merged = true;
                break;
            }
        if (!merged) F.sites.emplace_back(pt, w);
    }
    std::erase_if(F.sites, [](const auto& s) { return s.second == 0.0; });
    return F;
}

}  // namespace qi
