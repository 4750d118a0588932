#pragma once

#include <algorithm>
#include <limits>
#include <random>

#include "qi/partition.hpp"

namespace qi {

// Cell corners, counter-clockwise from south-west.
enum Corner { SW = 0, SE = 1, NE = 2, NW = 3 };

// Triangle l of cell (r,s): 1 north, 2 west, 3 south, 4 east.
struct TriangleRef {
    int r = 0, s = 0, l = 0;
};

inline bool operator==(TriangleRef a, TriangleRef b) {
    return a.r == b.r && a.s == b.s && a.l == b.l;
}

// The two rectangle corners (V1,V2) of each triangle type; V3 is the cell center.
// Orientation is counter-clockwise for all four types.
inline std::array<int, 2> tri_corners(int l) {
    switch (l) {
        case 1: return {NE, NW};
        case 2: return {NW, SW};
        case 3: return {SW, SE};
        default: return {SE, NE};
    }
}

inline std::array<int, 2> corner_vertex(int r, int s, int k) {
    switch (k) {
        case SW: return {r - 1, s - 1};
        case SE: return {r, s - 1};
        case NE: return {r, s};
        default: return {r - 1, s};
    }
}

// Criss-cross triangulation of [x_0,x_m] x [y_0,y_n]: every cell split by both
// diagonals.  Quadratic BB domain points are registered globally and shared
// between adjacent patches; ids and edge ids are pure index arithmetic.
struct CrissCrossMesh {
    Partition1D px, py;
    int m = 0, n = 0;

    std::vector<Pt> dp;                         // domain point coordinates by id
    std::vector<std::array<int, 6>> tri_dp;     // per triangle: BB-ordered dp ids
    std::vector<std::array<Pt, 3>> tri_verts;   // V1, V2, V3(center)
    std::vector<std::array<int, 3>> tri_edges;  // side edge, diagonal(k1), diagonal(k2)
    std::vector<std::array<int, 2>> edge_tris;  // per edge: adjacent triangles, -1 if none
    int edge_count = 0;

    int tri_count() const { return 4 * m * n; }
    int dp_count() const { return int(dp.size()); }

    int tid(int r, int s, int l) const { return ((r - 1) * n + (s - 1)) * 4 + (l - 1); }
    TriangleRef tref(int t) const {
        int cell = t / 4;
        return {cell / n + 1, cell % n + 1, t % 4 + 1};
    }

    Pt vertex(int i, int j) const { return {px.knots[i], py.knots[j]}; }
    Pt center(int i, int j) const { return {px.s[i], py.s[j]}; }  // full index range

    // Domain point ids.
    int dp_vertex(int i, int j) const { return i * (n + 1) + j; }
    int dp_center(int r, int s) const { return (m + 1) * (n + 1) + (r - 1) * n + (s - 1); }
    int dp_hmid(int i, int j) const {  // midpoint of [A_{i-1,j}, A_{i,j}]
        return (m + 1) * (n + 1) + m * n + (i - 1) * (n + 1) + j;
    }
    int dp_vmid(int i, int j) const {  // midpoint of [A_{i,j-1}, A_{i,j}]
        return (m + 1) * (n + 1) + m * n + m * (n + 1) + i * n + (j - 1);
    }
    int dp_dmid(int r, int s, int k) const {  // midpoint of corner-k half-diagonal
        return (m + 1) * (n + 1) + m * n + m * (n + 1) + (m + 1) * n +
               ((r - 1) * n + (s - 1)) * 4 + k;
    }

    // Edge ids.
    int edge_h(int i, int j) const { return (i - 1) * (n + 1) + j; }  // i in 1..m, j in 0..n
    int edge_v(int i, int j) const { return m * (n + 1) + i * n + (j - 1); }  // i in 0..m
    int edge_d(int r, int s, int k) const {
        return m * (n + 1) + (m + 1) * n + ((r - 1) * n + (s - 1)) * 4 + k;
    }
    bool edge_is_h(int e) const { return e < m * (n + 1); }
    bool edge_is_v(int e) const { return e >= m * (n + 1) && e < m * (n + 1) + (m + 1) * n; }
    // For side edges, the (i,j) it was keyed with.
    std::array<int, 2> edge_h_key(int e) const { return {e / (n + 1) + 1, e % (n + 1)}; }
    std::array<int, 2> edge_v_key(int e) const {
        int v = e - m * (n + 1);
        return {v / n, v % n + 1};
    }
};

inline CrissCrossMesh build_mesh(const Partition1D& px, const Partition1D& py) {
    if (px.N < 2 || py.N < 2)
        throw config_error("mesh needs at least 2x2 cells, got " + std::to_string(px.N) + "x" +
                           std::to_string(py.N));
    CrissCrossMesh M;
    M.px = px;
    M.py = py;
    M.m = px.N;
    M.n = py.N;
    const int m = M.m, n = M.n;

    M.dp.resize((m + 1) * (n + 1) + m * n + m * (n + 1) + (m + 1) * n + 4 * m * n);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= n; ++j) M.dp[M.dp_vertex(i, j)] = M.vertex(i, j);
    for (int r = 1; r <= m; ++r)
        for (int s = 1; s <= n; ++s) M.dp[M.dp_center(r, s)] = M.center(r, s);
    for (int i = 1; i <= m; ++i)
        for (int j = 0; j <= n; ++j)
            M.dp[M.dp_hmid(i, j)] = {0.5 * (px.knots[i - 1] + px.knots[i]), py.knots[j]};
    for (int i = 0; i <= m; ++i)
        for (int j = 1; j <= n; ++j)
            M.dp[M.dp_vmid(i, j)] = {px.knots[i], 0.5 * (py.knots[j - 1] + py.knots[j])};
    for (int r = 1; r <= m; ++r)
        for (int s = 1; s <= n; ++s) {
            Pt c = M.center(r, s);
            for (int k = 0; k < 4; ++k) {
                auto [vi, vj] = corner_vertex(r, s, k);
                Pt v = M.vertex(vi, vj);
                M.dp[M.dp_dmid(r, s, k)] = {0.5 * (v.x + c.x), 0.5 * (v.y + c.y)};
            }
        }

    M.tri_dp.resize(4 * m * n);
    M.tri_verts.resize(4 * m * n);
    M.tri_edges.resize(4 * m * n);
    M.edge_count = m * (n + 1) + (m + 1) * n + 4 * m * n;
    M.edge_tris.assign(M.edge_count, {-1, -1});
    auto attach = [&](int e, int t) {
        auto& et = M.edge_tris[e];
        (et[0] < 0 ? et[0] : et[1]) = t;
    };
    for (int r = 1; r <= m; ++r)
        for (int s = 1; s <= n; ++s) {
            int cdp = M.dp_center(r, s);
            Pt c = M.center(r, s);
            for (int l = 1; l <= 4; ++l) {
                int t = M.tid(r, s, l);
                auto [k1, k2] = tri_corners(l);
                auto [i1, j1] = corner_vertex(r, s, k1);
                auto [i2, j2] = corner_vertex(r, s, k2);
                Pt V1 = M.vertex(i1, j1), V2 = M.vertex(i2, j2);
                int side, mid12;
                switch (l) {
                    case 1: side = M.edge_h(r, s), mid12 = M.dp_hmid(r, s); break;
                    case 2: side = M.edge_v(r - 1, s), mid12 = M.dp_vmid(r - 1, s); break;
                    case 3: side = M.edge_h(r, s - 1), mid12 = M.dp_hmid(r, s - 1); break;
                    default: side = M.edge_v(r, s), mid12 = M.dp_vmid(r, s); break;
                }
                M.tri_verts[t] = {V1, V2, c};
                M.tri_dp[t] = {M.dp_vertex(i1, j1), mid12,           M.dp_dmid(r, s, k1),
                               M.dp_vertex(i2, j2), M.dp_dmid(r, s, k2), cdp};
                M.tri_edges[t] = {side, M.edge_d(r, s, k1), M.edge_d(r, s, k2)};
                attach(side, t);
                attach(M.edge_d(r, s, k1), t);
                attach(M.edge_d(r, s, k2), t);
            }
        }
    return M;
}

// Table 1: indices of the seven B-splines active on triangle T_l of cell (r,s).
inline std::array<std::pair<int, int>, 7> active_indices(const TriangleRef& T) {
    const int r = T.r, s = T.s;
    switch (T.l) {
        case 1:
            return {{{r, s - 1}, {r - 1, s}, {r, s}, {r + 1, s}, {r - 1, s + 1}, {r, s + 1},
                     {r + 1, s + 1}}};
        case 2:
            return {{{r - 1, s - 1}, {r, s - 1}, {r - 1, s}, {r, s}, {r + 1, s}, {r - 1, s + 1},
                     {r, s + 1}}};
        case 3:
            return {{{r - 1, s - 1}, {r, s - 1}, {r + 1, s - 1}, {r - 1, s}, {r, s}, {r + 1, s},
                     {r, s + 1}}};
        case 4:
            return {{{r, s - 1}, {r + 1, s - 1}, {r - 1, s}, {r, s}, {r + 1, s}, {r, s + 1},
                     {r + 1, s + 1}}};
        default: throw config_error("triangle type must be 1..4, got " + std::to_string(T.l));
    }
}

namespace detail {

inline std::array<double, 3> bary_raw(const std::array<Pt, 3>& V, Pt P) {
    const double det =
        (V[1].x - V[0].x) * (V[2].y - V[0].y) - (V[2].x - V[0].x) * (V[1].y - V[0].y);
    const double l2 =
        ((P.x - V[0].x) * (V[2].y - V[0].y) - (V[2].x - V[0].x) * (P.y - V[0].y)) / det;
    const double l3 =
        ((V[1].x - V[0].x) * (P.y - V[0].y) - (P.x - V[0].x) * (V[1].y - V[0].y)) / det;
    return {1.0 - l2 - l3, l2, l3};
}

}  // namespace detail

// Deterministic point location: cells are left-closed (last one right-closed),
// triangle membership tested in the fixed order 3, 2, 1, 4.
inline TriangleRef locate(const CrissCrossMesh& M, Pt P) {
    if (!(P.x >= M.px.a() && P.x <= M.px.b() && P.y >= M.py.a() && P.y <= M.py.b()))
        throw config_error("point (" + fmt17(P.x) + "," + fmt17(P.y) + ") outside the domain");
    auto cell = [](const std::vector<double>& t, double v, int N) {
        int c = int(std::upper_bound(t.begin(), t.end(), v) - t.begin());
        return std::min(std::max(c, 1), N);
    };
    const int r = cell(M.px.knots, P.x, M.m), s = cell(M.py.knots, P.y, M.n);
    static constexpr int order[4] = {3, 2, 1, 4};
    int best_l = 3;
    double best = -1e300;
    for (int l : order) {
        auto lam = detail::bary_raw(M.tri_verts[M.tid(r, s, l)], P);
        double lo = std::min({lam[0], lam[1], lam[2]});
        if (lo >= -1e-12) return {r, s, l};
        if (lo > best) best = lo, best_l = l;
    }
    return {r, s, best_l};  // rounding fallback: most-interior candidate
}

// gamma-quasi-uniform random mesh on [0,1]^2: steps i.i.d. uniform on
// [1,gamma] (single stream, x partition drawn before y), rescaled per axis to
// unit length.  Within an axis the step ratio is <= gamma by construction;
// the two axes are rescaled independently, so for square meshes the draw is
// repeated until the global h/delta also lands within gamma (rectangular
// meshes have an unavoidable max(m,n)/min(m,n) floor and are left as drawn).
inline CrissCrossMesh random_mesh(int m, int n, double gamma, std::uint64_t seed) {
    if (!(gamma >= 1.0)) throw config_error("gamma must be >= 1, got " + fmt17(gamma));
    std::mt19937_64 rng(seed);
    auto part = [&](int N) {
        std::vector<double> step(N);
        double total = 0.0;
        for (double& s : step) {
            s = 1.0 + (gamma - 1.0) * uniform01(rng());
            total += s;
        }
        std::vector<double> knots(N + 1, 0.0);
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            acc += step[i];
            knots[i + 1] = acc / total;
        }
        knots[N] = 1.0;
        return build_partition(knots);
    };
    auto span = [](const Partition1D& p, double& hi, double& lo) {
        for (int i = 1; i <= p.N; ++i) {
            hi = std::max(hi, p.h[i]);
            lo = std::min(lo, p.h[i]);
        }
    };
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Partition1D px = part(m), py = part(n);
        double hi = 0.0, lo = std::numeric_limits<double>::infinity();
        span(px, hi, lo);
        span(py, hi, lo);
        if (m != n || hi <= gamma * lo * (1.0 + 1e-12)) return build_mesh(px, py);
    }
    throw science_error("no draw reached h/delta <= " + fmt17(gamma) + " in 1000 attempts");
}

struct MeshRatios {
    double h = 0, delta = 0, gamma = 1;
};

inline MeshRatios mesh_ratios(const CrissCrossMesh& M) {
    MeshRatios R;
    R.h = 0;
    R.delta = 1e300;
    for (int i = 1; i <= M.m; ++i) {
        R.h = std::max(R.h, M.px.h[i]);
        R.delta = std::min(R.delta, M.px.h[i]);
    }
    for (int j = 1; j <= M.n; ++j) {
        R.h = std::max(R.h, M.py.h[j]);
        R.delta = std::min(R.delta, M.py.h[j]);
    }
    R.gamma = R.h / R.delta;
    return R;
}

}  // namespace qi
