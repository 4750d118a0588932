#pragma once

#include "qi/bernstein.hpp"
#include "qi/functionals.hpp"
#include "qi/numeric.hpp"
#include "qi/parallel.hpp"
#include "qi/univariate.hpp"

namespace qi {

// Support of B_ij: the classical octagon (degenerating near the boundary
// through the double end knots) intersected with the domain.
struct SupportOctagon {
    int i = 0, j = 0;
    std::vector<int> tris;  // triangle ids, ascending
};

inline SupportOctagon support(const CrissCrossMesh& M, int i, int j) {
    check_index(M, i, j);
    auto X = [&](int k) { return M.px.knots[std::min(std::max(k, 0), M.m)]; };
    auto Y = [&](int k) { return M.py.knots[std::min(std::max(k, 0), M.n)]; };
    Pt oct[8] = {{X(i - 2), Y(j - 1)}, {X(i - 1), Y(j - 2)}, {X(i), Y(j - 2)},
                 {X(i + 1), Y(j - 1)}, {X(i + 1), Y(j)},     {X(i), Y(j + 1)},
                 {X(i - 1), Y(j + 1)}, {X(i - 2), Y(j)}};
    std::vector<Pt> poly;  // drop collapsed vertices
    for (const Pt& p : oct)
        if (poly.empty() || !(p == poly.back())) poly.push_back(p);
    if (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
    auto strictly_inside = [&](Pt P) {
        for (std::size_t a = 0; a < poly.size(); ++a) {
            Pt A = poly[a], B = poly[(a + 1) % poly.size()];
            double cr = (B.x - A.x) * (P.y - A.y) - (B.y - A.y) * (P.x - A.x);
            if (cr <= 1e-12 * std::max(1.0, std::abs(B.x - A.x) + std::abs(B.y - A.y)))
                return false;
        }
        return true;
    };
    SupportOctagon S{i, j, {}};
    for (int r = std::max(1, i - 1); r <= std::min(M.m, i + 1); ++r)
        for (int s = std::max(1, j - 1); s <= std::min(M.n, j + 1); ++s)
            for (int l = 1; l <= 4; ++l) {
                int t = M.tid(r, s, l);
                const auto& V = M.tri_verts[t];
                Pt cen{(V[0].x + V[1].x + V[2].x) / 3.0, (V[0].y + V[1].y + V[2].y) / 3.0};
                if (strictly_inside(cen)) S.tris.push_back(t);
            }
    return S;
}

// One B-spline: support plus its sparse BB net (dp id -> coefficient, sorted).
struct BSpline {
    int i = 0, j = 0;
    SupportOctagon sup;
    std::vector<std::pair<int, double>> net;

    double coef(int dp) const {
        auto it = std::lower_bound(net.begin(), net.end(), dp,
                                   [](const auto& e, int d) { return e.first < d; });
        return (it != net.end() && it->first == dp) ? it->second : 0.0;
    }
};

inline BBPatch bspline_patch(const CrissCrossMesh& M, const BSpline& B, int t) {
    BBPatch p;
    p.V = M.tri_verts[t];
    const auto& ids = M.tri_dp[t];
    for (int k = 0; k < 6; ++k) p.c[k] = B.coef(ids[k]);
    return p;
}

namespace detail {

struct LocalSystem {
    std::vector<int> dps;  // global dp ids, ascending
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    bool homogeneous = true;

    int col(int dp) const {
        return int(std::lower_bound(dps.begin(), dps.end(), dp) - dps.begin());
    }
    void add(const std::vector<std::pair<int, double>>& entries, double b) {
        std::vector<double> row(dps.size(), 0.0);
        for (auto [d, v] : entries) row[col(d)] += v;
        rows.push_back(std::move(row));
        rhs.push_back(b);
        if (b != 0.0) homogeneous = false;
    }
};

// Zero value and zero cross-edge gradient: unit rows for the five domain
// points of triangle t other than the vertex opposite to edge e.
inline void zero_edge_rows(const CrissCrossMesh& M, int t, int e, LocalSystem& sys) {
    int pos = 0;
    while (M.tri_edges[t][pos] != e) ++pos;
    static constexpr int opposite_slot[3] = {5, 3, 0};
    for (int slot = 0; slot < 6; ++slot)
        if (slot != opposite_slot[pos]) sys.add({{M.tri_dp[t][slot], 1.0}}, 0.0);
}

// Boundary trace rows for side edge e of triangle t: the restriction of the
// quadratic patch to the edge must match the univariate trace U (identically
// zero unless the spline index lies on that side).
inline void trace_rows(const CrissCrossMesh& M, int i, int j, int t, int e, LocalSystem& sys) {
    std::function<double(Pt)> U = [](Pt) { return 0.0; };
    if (M.edge_is_h(e)) {
        auto [ei, ej] = M.edge_h_key(e);
        int side_j = ej == 0 ? 0 : M.n + 1;
        if (j == side_j) U = [&M, i](Pt P) { return univariate_bspline(M.px, i, P.x); };
    } else {
        auto [ei, ej] = M.edge_v_key(e);
        int side_i = ei == 0 ? 0 : M.m + 1;
        if (i == side_i) U = [&M, j](Pt P) { return univariate_bspline(M.py, j, P.y); };
    }
    const auto& ids = M.tri_dp[t];
    Pt A = M.tri_verts[t][0], B = M.tri_verts[t][1];
    Pt mid{0.5 * (A.x + B.x), 0.5 * (A.y + B.y)};
    sys.add({{ids[0], 1.0}}, U(A));
    sys.add({{ids[3], 1.0}}, U(B));
    sys.add({{ids[1], 1.0}}, 2.0 * U(mid) - 0.5 * (U(A) + U(B)));
}

}  // namespace detail

// Builds the unnormalized B-spline by constraint solving: C1 across interior
// edges of the support, zero value+gradient on the support boundary inside the
// domain, and boundary trace rows on the domain boundary.  Inner indices give
// a homogeneous system whose nullspace must be one-dimensional; boundary
// indices are solved in the least-squares sense and arrive trace-normalized.
inline BSpline construct_bspline_shape(const CrissCrossMesh& M, int i, int j) {
    BSpline B;
    B.i = i;
    B.j = j;
    B.sup = support(M, i, j);

    detail::LocalSystem sys;
    {
        std::vector<int> dps;
        for (int t : B.sup.tris)
            for (int d : M.tri_dp[t]) dps.push_back(d);
        std::sort(dps.begin(), dps.end());
        dps.erase(std::unique(dps.begin(), dps.end()), dps.end());
        sys.dps = std::move(dps);
    }
    std::vector<char> in_sup(M.tri_count(), 0);
    for (int t : B.sup.tris) in_sup[t] = 1;

    std::vector<char> seen(M.edge_count, 0);
    for (int t : B.sup.tris)
        for (int e : M.tri_edges[t]) {
            if (seen[e]) continue;
            seen[e] = 1;
            const auto& et = M.edge_tris[e];
            int other = et[0] == t ? et[1] : et[0];
            if (other >= 0 && in_sup[other]) {
                int tA = std::min(t, other), tB = std::max(t, other);
                for (const auto& row : c1_constraint_rows(M, tA, tB)) sys.add(row.entries, 0.0);
            } else if (other >= 0) {
                detail::zero_edge_rows(M, t, e, sys);
            } else {
                detail::trace_rows(M, i, j, t, e, sys);
            }
        }

    DenseMatrix A(sys.rows.size(), sys.dps.size());
    for (std::size_t r = 0; r < sys.rows.size(); ++r)
        for (std::size_t c = 0; c < sys.dps.size(); ++c) A(r, c) = sys.rows[r][c];

    Vector sol;
    if (sys.homogeneous) {
        auto basis = nullspace(A, 1e-9);
        if (basis.size() != 1)
            throw science_error("B-spline " + index_str(i, j) + ": solution space has dimension " +
                                std::to_string(basis.size()) + ", expected 1");
        sol = basis[0];
        int top = 0;
        for (int k = 1; k < sol.size(); ++k)
            if (std::abs(sol(k)) > std::abs(sol(top))) top = k;
        if (sol(top) < 0.0) sol = -sol;
    } else {
        Vector b = Eigen::Map<Vector>(sys.rhs.data(), sys.rhs.size());
        auto [x, res] = solve_least_squares(A, b);
        if (!(res <= 1e-10))
            throw science_error("B-spline " + index_str(i, j) +
                                ": boundary trace residual " + fmt17(res));
        sol = x;
    }
    B.net.reserve(sys.dps.size());
    for (std::size_t c = 0; c < sys.dps.size(); ++c) B.net.emplace_back(sys.dps[c], sol(c));
    return B;
}

// The complete family with normalization scales and diagnostics hooks.
struct BasisFamily {
    const CrissCrossMesh* mesh = nullptr;
    std::vector<BSpline> splines;  // index (i*(n+2)+j), nets already scaled
    std::vector<double> scales;    // 1 for boundary indices
    double normalization_residual = 0.0;

    int idx(int i, int j) const { return i * (mesh->n + 2) + j; }
    const BSpline& at(int i, int j) const { return splines[idx(i, j)]; }
};

// Solves for the inner scales c_ij so that sum_ij mu_ij(e) c_ij B_ij
// reproduces all six monomials of degree <= 2 in the global BB net, using the
// S2 functionals; the system is consistent and must have a unique solution.
inline BasisFamily normalize_basis(const CrissCrossMesh& M, std::vector<BSpline> shapes,
                                   const std::vector<Functional>& s2f) {
    const int m = M.m, n = M.n, ndp = M.dp_count();
    const int ncols = m * n;
    auto inner_col = [&](int i, int j) { return (i - 1) * n + (j - 1); };
    auto is_inner = [&](int i, int j) { return i >= 1 && i <= m && j >= 1 && j <= n; };
    auto shape_at = [&](int i, int j) -> const BSpline& { return shapes[i * (n + 2) + j]; };

    std::vector<Poly2> monos;
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; b + a <= 2; ++b) monos.push_back(Poly2::monomial(a, b));

    // Sparse column data per monomial, plus dense right-hand sides.
    struct Alpha {
        std::vector<double> rhs;                                  // size ndp
        std::vector<std::vector<std::pair<int, double>>> by_dp;   // dp -> (col, val)
    };
    std::vector<Alpha> sys(monos.size());
    double rhs_norm2 = 0.0;
    for (std::size_t q = 0; q < monos.size(); ++q) {
        const Poly2& e = monos[q];
        auto& S = sys[q];
        S.rhs = global_net(M, e);
        S.by_dp.resize(ndp);
        for (int i = 0; i <= m + 1; ++i)
            for (int j = 0; j <= n + 1; ++j) {
                double mu = s2f[i * (n + 2) + j]([&](Pt P) { return e(P); });
                const BSpline& B = shape_at(i, j);
                if (is_inner(i, j)) {
                    int c = inner_col(i, j);
                    for (auto [d, v] : B.net)
                        if (mu * v != 0.0) S.by_dp[d].emplace_back(c, mu * v);
                } else {
                    for (auto [d, v] : B.net) S.rhs[d] -= mu * v;
                }
            }
        for (double v : S.rhs) rhs_norm2 += v * v;
    }
    const double rhs_scale = std::sqrt(rhs_norm2);

    DenseMatrix G = DenseMatrix::Zero(ncols, ncols);
    Vector g = Vector::Zero(ncols);
    for (const auto& S : sys)
        for (int d = 0; d < ndp; ++d) {
            const auto& lst = S.by_dp[d];
            for (auto [c1, v1] : lst) {
                g(c1) += v1 * S.rhs[d];
                for (auto [c2, v2] : lst) G(c1, c2) += v1 * v2;
            }
        }

    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(G);
    const Vector& lam = es.eigenvalues();
    const double lam_max = lam(ncols - 1);
    int nullity = 0;
    for (int k = 0; k < ncols; ++k)
        if (lam(k) <= 1e-18 * lam_max) ++nullity;
    if (nullity != 0)
        throw science_error("basis normalization system has nullity " + std::to_string(nullity));

    auto solve_gram = [&](const Vector& rhs) {
        Vector y = es.eigenvectors().transpose() * rhs;
        for (int k = 0; k < ncols; ++k) y(k) /= lam(k);
        return Vector(es.eigenvectors() * y);
    };
    auto apply_A = [&](const Vector& x, std::vector<std::vector<double>>& res) {
        res.assign(sys.size(), {});
        for (std::size_t q = 0; q < sys.size(); ++q) {
            auto& r = res[q];
            r.assign(ndp, 0.0);
            for (int d = 0; d < ndp; ++d) {
                double acc = 0.0;
                for (auto [c, v] : sys[q].by_dp[d]) acc += v * x(c);
                r[d] = sys[q].rhs[d] - acc;  // residual b - Ax
            }
        }
    };

    Vector x = solve_gram(g);
    std::vector<std::vector<double>> resid;
    for (int pass = 0; pass < 2; ++pass) {  // iterative refinement on the normal equations
        apply_A(x, resid);
        Vector gr = Vector::Zero(ncols);
        for (std::size_t q = 0; q < sys.size(); ++q)
            for (int d = 0; d < ndp; ++d)
                for (auto [c, v] : sys[q].by_dp[d]) gr(c) += v * resid[q][d];
        x += solve_gram(gr);
    }
    apply_A(x, resid);
    double res_norm2 = 0.0;
    for (const auto& r : resid)
        for (double v : r) res_norm2 += v * v;
    const double residual = std::sqrt(res_norm2);
    if (!(residual <= 1e-9 * rhs_scale))
        throw science_error("basis normalization residual " + fmt17(residual) + " exceeds " +
                            fmt17(1e-9 * rhs_scale));

    BasisFamily F;
    F.mesh = &M;
    F.normalization_residual = residual;
    F.scales.assign((m + 2) * (n + 2), 1.0);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= n; ++j) {
            double sc = x(inner_col(i, j));
            if (!(sc > 0.0))
                throw science_error("nonpositive normalization scale " + fmt17(sc) +
                                    " at index " + index_str(i, j));
            F.scales[i * (n + 2) + j] = sc;
        }
    for (int i = 0; i <= m + 1; ++i)
        for (int j = 0; j <= n + 1; ++j) {
            BSpline& B = shapes[i * (n + 2) + j];
            double sc = F.scales[i * (n + 2) + j];
            if (sc != 1.0)
                for (auto& [d, v] : B.net) v *= sc;
        }
    F.splines = std::move(shapes);
    return F;
}

// Constructs all shapes (concurrently) and normalizes.
inline BasisFamily build_family(const CrissCrossMesh& M) {
    const int m = M.m, n = M.n;
    std::vector<BSpline> shapes((m + 2) * (n + 2));
    std::vector<Functional> s2f((m + 2) * (n + 2));
    S2Coefficients C = s2_coefficients(M);
    parallel_for((m + 2) * (n + 2), [&](int k) {
        int i = k / (n + 2), j = k % (n + 2);
        shapes[k] = construct_bspline_shape(M, i, j);
        s2f[k] = s2_functional(M, C, i, j);
    });
    return normalize_basis(M, std::move(shapes), s2f);
}

inline double eval_bspline_on(const BasisFamily& F, int i, int j, int t, Pt P, int a1 = 0,
                              int a2 = 0) {
    return diff_patch_value(bspline_patch(*F.mesh, F.at(i, j), t), P, a1, a2);
}

inline double eval_bspline(const BasisFamily& F, int i, int j, Pt P, int a1 = 0, int a2 = 0) {
    TriangleRef T = locate(*F.mesh, P);
    return eval_bspline_on(F, i, j, F.mesh->tid(T.r, T.s, T.l), P, a1, a2);
}

struct BasisDiagnostics {
    double negativity = 0.0;    // most negative sampled basis value
    double pou = 0.0;           // sup |sum B - 1|
    double dependence = 0.0;    // sup |sum (-1)^{i+j} h_i k_j B_ij|
    double dependence_scale = 0.0;  // max h_i k_j
    double trace = 0.0;         // sup |boundary trace - univariate|
    double c1 = 0.0;            // sup relative C1 row residual
    double lemma1_d1 = 0.0;     // sup of first-derivative sums over 4 h^-a1 k^-a2
    double lemma1_d2 = 0.0;     // sup of second-derivative sums over 6 h^-a1 k^-a2
};

inline const std::vector<std::array<double, 3>>& interior_bary_samples() {
    static const std::vector<std::array<double, 3>> pts = [] {
        std::vector<std::array<double, 3>> v;
        for (int a = 1; a <= 4; ++a)
            for (int b = 1; a + b <= 5; ++b)
                v.push_back({a / 6.0, b / 6.0, (6 - a - b) / 6.0});
        return v;
    }();
    return pts;
}

inline BasisDiagnostics basis_diagnostics(const BasisFamily& F) {
    const CrissCrossMesh& M = *F.mesh;
    const int m = M.m, n = M.n;
    BasisDiagnostics D;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= n; ++j)
            D.dependence_scale = std::max(D.dependence_scale, M.px.h[i] * M.py.h[j]);

    std::vector<double> maxcoef((m + 2) * (n + 2), 0.0);
    for (int k = 0; k < int(F.splines.size()); ++k)
        for (auto [d, v] : F.splines[k].net) maxcoef[k] = std::max(maxcoef[k], std::abs(v));

    const int nthreads = std::max(1, std::min(thread_count(), M.tri_count()));
    std::vector<BasisDiagnostics> parts(nthreads);
    parallel_for(nthreads, [&](int w) {
        BasisDiagnostics& P = parts[w];
        P.negativity = 1e300;
        for (int t = w; t < M.tri_count(); t += nthreads) {
            TriangleRef T = M.tref(t);
            auto act = active_indices(T);
            const auto& V = M.tri_verts[t];
            std::array<BBPatch, 7> patch;
            for (int k = 0; k < 7; ++k)
                patch[k] = bspline_patch(M, F.at(act[k].first, act[k].second), t);

            auto at_bary = [&](const std::array<double, 3>& l) {
                return Pt{l[0] * V[0].x + l[1] * V[1].x + l[2] * V[2].x,
                          l[0] * V[0].y + l[1] * V[1].y + l[2] * V[2].y};
            };
            std::vector<std::array<double, 3>> samples = interior_bary_samples();
            samples.push_back({1, 0, 0});
            samples.push_back({0, 1, 0});
            samples.push_back({0, 0, 1});
            for (const auto& lam : samples) {
                Pt Pp = at_bary(lam);
                double sum = 0.0, dep = 0.0;
                for (int k = 0; k < 7; ++k) {
                    double v = eval_patch(patch[k], Pp);
                    P.negativity = std::min(P.negativity, v);
                    sum += v;
                    auto [bi, bj] = act[k];
                    if (bi >= 1 && bi <= m && bj >= 1 && bj <= n) {
                        double w2 = M.px.h[bi] * M.py.h[bj];
                        dep += (((bi + bj) & 1) ? -w2 : w2) * v;
                    }
                }
                P.pou = std::max(P.pou, std::abs(sum - 1.0));
                P.dependence = std::max(P.dependence, std::abs(dep));
            }

            // Lemma-type derivative sums.
            const double hr = M.px.h[T.r], ks = M.py.h[T.s];
            for (int k1 = 0; k1 < 3; ++k1) {
                Pt Vp = V[k1];
                double s10 = 0.0, s01 = 0.0;
                for (int k = 0; k < 7; ++k) {
                    s10 += std::abs(eval_patch(diff_patch(patch[k], {1, 0}), Vp));
                    s01 += std::abs(eval_patch(diff_patch(patch[k], {0, 1}), Vp));
                }
                P.lemma1_d1 = std::max({P.lemma1_d1, s10 * hr / 4.0, s01 * ks / 4.0});
            }
            double s20 = 0.0, s11 = 0.0, s02 = 0.0;
            for (int k = 0; k < 7; ++k) {
                LinearPatch dx = diff_patch(patch[k], {1, 0});
                LinearPatch dy = diff_patch(patch[k], {0, 1});
                s20 += std::abs(diff_patch(dx, {1, 0}));
                s11 += std::abs(diff_patch(dx, {0, 1}));
                s02 += std::abs(diff_patch(dy, {0, 1}));
            }
            P.lemma1_d2 = std::max(
                {P.lemma1_d2, s20 * hr * hr / 6.0, s11 * hr * ks / 6.0, s02 * ks * ks / 6.0});

            // C1 rows across the interior edges owned by this triangle.
            for (int e : M.tri_edges[t]) {
                const auto& et = M.edge_tris[e];
                if (et[0] != t || et[1] < 0) continue;  // owner is the first-attached triangle
                auto rows = c1_constraint_rows(M, et[0], et[1]);
                auto act2 = active_indices(M.tref(et[1]));
                std::vector<std::pair<int, int>> splines(act.begin(), act.end());
                for (auto ij : act2)
                    if (std::find(splines.begin(), splines.end(), ij) == splines.end())
                        splines.push_back(ij);
                for (auto [bi, bj] : splines) {
                    const BSpline& B = F.at(bi, bj);
                    double denom = std::max(maxcoef[F.idx(bi, bj)], 1e-300);
                    for (const auto& row : rows) {
                        double r = 0.0;
                        for (auto [d, v] : row.entries) r += v * B.coef(d);
                        P.c1 = std::max(P.c1, std::abs(r) / denom);
                    }
                }
            }
        }
    });
    D.negativity = 1e300;
    for (const auto& P : parts) {
        D.negativity = std::min(D.negativity, P.negativity);
        D.pou = std::max(D.pou, P.pou);
        D.dependence = std::max(D.dependence, P.dependence);
        D.c1 = std::max(D.c1, P.c1);
        D.lemma1_d1 = std::max(D.lemma1_d1, P.lemma1_d1);
        D.lemma1_d2 = std::max(D.lemma1_d2, P.lemma1_d2);
    }

    // Boundary traces against the univariate clamped family (zero for inner indices).
    auto edge_trace = [&](int t, Pt A, Pt B, bool horizontal, int side_idx) {
        TriangleRef T = M.tref(t);
        auto act = active_indices(T);
        for (int q = 0; q <= 6; ++q) {
            double u = q / 6.0;
            Pt Pp{A.x + u * (B.x - A.x), A.y + u * (B.y - A.y)};
            for (auto [bi, bj] : act) {
                double v = eval_bspline_on(F, bi, bj, t, Pp);
                double expect = 0.0;
                if (horizontal && bj == side_idx)
                    expect = univariate_bspline(M.px, bi, Pp.x);
                else if (!horizontal && bi == side_idx)
                    expect = univariate_bspline(M.py, bj, Pp.y);
                D.trace = std::max(D.trace, std::abs(v - expect));
            }
        }
    };
    for (int r = 1; r <= m; ++r) {
        edge_trace(M.tid(r, 1, 3), M.vertex(r - 1, 0), M.vertex(r, 0), true, 0);
        edge_trace(M.tid(r, n, 1), M.vertex(r - 1, n), M.vertex(r, n), true, n + 1);
    }
    for (int s = 1; s <= n; ++s) {
        edge_trace(M.tid(1, s, 2), M.vertex(0, s - 1), M.vertex(0, s), false, 0);
        edge_trace(M.tid(m, s, 4), M.vertex(m, s - 1), M.vertex(m, s), false, m + 1);
    }
    return D;
}

}  // namespace qi
