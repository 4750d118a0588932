#pragma once

#include "qi/mesh.hpp"

namespace qi {

// Quadratic patch in BB-form; coefficients ordered
// (200), (110), (101), (020), (011), (002), i.e.
// V1, mid(V1,V2), mid(V1,V3), V2, mid(V2,V3), V3.
struct BBPatch {
    std::array<Pt, 3> V;
    std::array<double, 6> c{};
};

// Directional derivative of a BBPatch (degree 1), coefficients at V1, V2, V3.
struct LinearPatch {
    std::array<Pt, 3> V;
    std::array<double, 3> c{};
};

namespace detail {

inline double tri_det(const std::array<Pt, 3>& V) {
    return (V[1].x - V[0].x) * (V[2].y - V[0].y) - (V[2].x - V[0].x) * (V[1].y - V[0].y);
}

inline std::array<double, 3> bary_checked(const std::array<Pt, 3>& V, Pt P) {
    if (tri_det(V) == 0.0) throw config_error("degenerate triangle (collinear vertices)");
    auto lam = bary_raw(V, P);
    if (std::min({lam[0], lam[1], lam[2]}) < -1e-9)
        throw config_error("point (" + fmt17(P.x) + "," + fmt17(P.y) + ") outside the triangle");
    double sum = 0.0;
    for (auto& l : lam) {
        if (l < 0.0) l = 0.0;
        sum += l;
    }
    for (auto& l : lam) l /= sum;
    return lam;
}

// Barycentric coordinates of a direction vector (components sum to zero).
inline std::array<double, 3> bary_dir(const std::array<Pt, 3>& V, Vec d) {
    const double det = tri_det(V);
    if (det == 0.0) throw config_error("degenerate triangle (collinear vertices)");
    const double a2 = (d.x * (V[2].y - V[0].y) - (V[2].x - V[0].x) * d.y) / det;
    const double a3 = ((V[1].x - V[0].x) * d.y - d.x * (V[1].y - V[0].y)) / det;
    return {-a2 - a3, a2, a3};
}

}  // namespace detail

inline double eval_patch(const BBPatch& p, Pt P) {
    auto l = detail::bary_checked(p.V, P);
    return p.c[0] * l[0] * l[0] + p.c[3] * l[1] * l[1] + p.c[5] * l[2] * l[2] +
           2.0 * (p.c[1] * l[0] * l[1] + p.c[2] * l[0] * l[2] + p.c[4] * l[1] * l[2]);
}

inline LinearPatch diff_patch(const BBPatch& p, Vec d) {
    if (d.x == 0.0 && d.y == 0.0) throw config_error("zero direction vector");
    auto a = detail::bary_dir(p.V, d);
    LinearPatch L;
    L.V = p.V;
    L.c[0] = 2.0 * (a[0] * p.c[0] + a[1] * p.c[1] + a[2] * p.c[2]);
    L.c[1] = 2.0 * (a[0] * p.c[1] + a[1] * p.c[3] + a[2] * p.c[4]);
    L.c[2] = 2.0 * (a[0] * p.c[2] + a[1] * p.c[4] + a[2] * p.c[5]);
    return L;
}

inline double eval_patch(const LinearPatch& p, Pt P) {
    auto l = detail::bary_checked(p.V, P);
    return p.c[0] * l[0] + p.c[1] * l[1] + p.c[2] * l[2];
}

// Second directional derivative: constant on the triangle.
inline double diff_patch(const LinearPatch& p, Vec d) {
    if (d.x == 0.0 && d.y == 0.0) throw config_error("zero direction vector");
    auto b = detail::bary_dir(p.V, d);
    return b[0] * p.c[0] + b[1] * p.c[1] + b[2] * p.c[2];
}

inline double diff_patch_value(const BBPatch& p, Pt P, int a1, int a2) {
    if (a1 < 0 || a2 < 0 || a1 + a2 > 2) throw config_error("derivative order must satisfy |alpha| <= 2");
    if (a1 + a2 == 0) return eval_patch(p, P);
    Vec first = a1 > 0 ? Vec{1, 0} : Vec{0, 1};
    LinearPatch L = diff_patch(p, first);
    if (a1 + a2 == 1) return eval_patch(L, P);
    Vec second = a1 == 2 ? Vec{1, 0} : Vec{0, 1};
    return diff_patch(L, second);
}

// Bivariate polynomial of total degree <= 2: coef[a][b] multiplies x^a y^b.
struct Poly2 {
    double coef[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    static Poly2 from_terms(const std::vector<std::tuple<int, int, double>>& terms) {
        Poly2 p;
        for (auto [a, b, c] : terms) {
            if (a < 0 || b < 0 || a + b > 2)
                throw config_error("polynomial term x^" + std::to_string(a) + " y^" +
                                   std::to_string(b) + " has degree > 2");
            p.coef[a][b] += c;
        }
        return p;
    }

    static Poly2 monomial(int a1, int a2) { return from_terms({{a1, a2, 1.0}}); }

    double operator()(Pt P) const {
        double v = 0.0;
        for (int a = 0; a <= 2; ++a)
            for (int b = 0; b + a <= 2; ++b)
                if (coef[a][b] != 0.0)
                    v += coef[a][b] * std::pow(P.x, a) * std::pow(P.y, b);
        return v;
    }

    // Polar form B(P,Q): symmetric, bi-affine, B(P,P) = p(P).
    double blossom(Pt P, Pt Q) const {
        return coef[0][0] + coef[1][0] * 0.5 * (P.x + Q.x) + coef[0][1] * 0.5 * (P.y + Q.y) +
               coef[2][0] * P.x * Q.x + coef[0][2] * P.y * Q.y +
               coef[1][1] * 0.5 * (P.x * Q.y + P.y * Q.x);
    }
};

inline BBPatch polynomial_to_patch(const Poly2& p, const std::array<Pt, 3>& V) {
    if (detail::tri_det(V) == 0.0) throw config_error("degenerate triangle (collinear vertices)");
    BBPatch out;
    out.V = V;
    out.c[0] = p.blossom(V[0], V[0]);
    out.c[1] = p.blossom(V[0], V[1]);
    out.c[2] = p.blossom(V[0], V[2]);
    out.c[3] = p.blossom(V[1], V[1]);
    out.c[4] = p.blossom(V[1], V[2]);
    out.c[5] = p.blossom(V[2], V[2]);
    return out;
}

// C1 piecewise quadratic on the whole mesh: one coefficient per shared domain
// point (C0 is structural, C1 is enforced by construction).
struct SplineFunction {
    const CrissCrossMesh* mesh = nullptr;
    std::vector<double> coef;  // indexed by domain point id
};

inline BBPatch patch_of(const SplineFunction& f, int t) {
    BBPatch p;
    p.V = f.mesh->tri_verts[t];
    const auto& ids = f.mesh->tri_dp[t];
    for (int k = 0; k < 6; ++k) p.c[k] = f.coef[ids[k]];
    return p;
}

// Global BB net of a polynomial (consistent across patches by polar-form symmetry).
inline std::vector<double> global_net(const CrissCrossMesh& M, const Poly2& p) {
    std::vector<double> net(M.dp_count(), 0.0);
    for (int t = 0; t < M.tri_count(); ++t) {
        BBPatch bp = polynomial_to_patch(p, M.tri_verts[t]);
        const auto& ids = M.tri_dp[t];
        for (int k = 0; k < 6; ++k) net[ids[k]] = bp.c[k];
    }
    return net;
}

struct SparseRow {
    std::vector<std::pair<int, double>> entries;  // (domain point id, coefficient)
    double rhs = 0.0;
};

// The two C1 relations across the edge shared by triangles tA and tB, as
// homogeneous rows over global BB coefficients.  With shared edge (P,Q),
// opposite vertices R (in tA) and S (in tB), and beta the barycentric
// coordinates of S w.r.t. (P,Q,R):
//   c(mid(P,S)) = b1 c(P)        + b2 c(mid(P,Q)) + b3 c(mid(P,R))
//   c(mid(Q,S)) = b1 c(mid(P,Q)) + b2 c(Q)        + b3 c(mid(Q,R))
inline std::array<SparseRow, 2> c1_constraint_rows(const CrissCrossMesh& M, int tA, int tB) {
    static constexpr int vpos[3] = {0, 3, 5};  // vertex slots in the BB ordering
    auto vdp = [&](int t, int k) { return M.tri_dp[t][vpos[k]]; };
    auto mid_dp = [&](int t, int ka, int kb) {
        int lo = std::min(ka, kb), hi = std::max(ka, kb);
        if (lo == 0) return M.tri_dp[t][hi == 1 ? 1 : 2];
        return M.tri_dp[t][4];
    };

    int sharedA[2], sharedB[2], cnt = 0, oppA = -1, oppB = -1;
    for (int ka = 0; ka < 3; ++ka) {
        int kb_match = -1;
        for (int kb = 0; kb < 3; ++kb)
            if (vdp(tA, ka) == vdp(tB, kb)) kb_match = kb;
        if (kb_match >= 0) {
            if (cnt < 2) sharedA[cnt] = ka, sharedB[cnt] = kb_match;
            ++cnt;
        } else {
            oppA = ka;
        }
    }
    if (cnt != 2) throw config_error("triangles do not share a full edge");
    for (int kb = 0; kb < 3; ++kb)
        if (kb != sharedB[0] && kb != sharedB[1]) oppB = kb;

    const auto& VA = M.tri_verts[tA];
    const auto& VB = M.tri_verts[tB];
    std::array<Pt, 3> PQR = {VA[sharedA[0]], VA[sharedA[1]], VA[oppA]};
    auto beta = detail::bary_raw(PQR, VB[oppB]);

    const int P = sharedA[0], Q = sharedA[1];
    std::array<SparseRow, 2> rows;
    rows[0].entries = {{mid_dp(tB, sharedB[0], oppB), 1.0},
                       {vdp(tA, P), -beta[0]},
                       {mid_dp(tA, P, Q), -beta[1]},
                       {mid_dp(tA, P, oppA), -beta[2]}};
    rows[1].entries = {{mid_dp(tB, sharedB[1], oppB), 1.0},
                       {mid_dp(tA, P, Q), -beta[0]},
                       {vdp(tA, Q), -beta[1]},
                       {mid_dp(tA, Q, oppA), -beta[2]}};
    return rows;
}

}  // namespace qi
