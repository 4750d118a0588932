#pragma once

#include <limits>

#include "qi/functions.hpp"
#include "qi/operators.hpp"

namespace qi {

inline Rect domain_rect(const CrissCrossMesh& M) {
    return {M.px.a(), M.px.b(), M.py.a(), M.py.b()};
}

// Proven constants per (key, operator).  The primed constants are lemma-level
// internals recorded for reference; no check uses them.
inline double bound_constant(const std::string& key, OpKind k) {
    const bool s = k == OpKind::s2;
    if (key == "C0") return s ? 20.5 : 12.0;
    if (key == "C1") return s ? 3.0 : 2.0;
    if (key == "C2") return s ? 3.0 / 4.0 : 1.0 / 2.0;
    if (key == "C3") return s ? 1.0 / 8.0 : 1.0 / 12.0;
    if (key == "C1bar") return s ? 120.0 : 70.0;
    if (key == "C2bar") return s ? 122.0 : 65.0;
    if (key == "C3bar") return s ? 269.0 / 12.0 : 65.0 / 6.0;
    if (key == "D2") return s ? 183.0 : 195.0 / 2.0;
    if (key == "D3") return s ? 269.0 / 8.0 : 65.0 / 4.0;
    if (key == "C1p") return s ? 30.0 : 35.0 / 2.0;
    if (key == "C2p") return s ? 61.0 / 2.0 : 65.0 / 4.0;
    if (key == "C2pp") return s ? 269.0 / 48.0 : 65.0 / 24.0;
    throw config_error("unknown bound constant '" + key + "'");
}

struct ErrorReport {
    OpKind kind = OpKind::s2;
    std::string theorem;  // empty for a plain sup-error report
    std::string alphas;   // derivative multi-indices measured, e.g. "10,01"
    double measured = 0;
    std::string sample_rule;
    double bound = -1;  // -1: no bound attached
    double margin = 0;
    bool pass = true;
    double omega_analytic = -1, omega_sampled = -1, d3 = -1;
};

// Max |D^a f - D^a Qf| over a fixed per-triangle barycentric sample set:
// interior points (i,j,k)/denom with i,j,k >= 1, plus the vertices unless
// |alpha| = 2 (second derivatives live on triangle interiors only).
inline ErrorReport sup_error(const TestFunction& f, const SplineFunction& qf, OpKind kind,
                             int a1, int a2, int denom = 6) {
    if (denom < 3) throw config_error("sample denominator must be >= 3");
    const auto& df = f.deriv(a1, a2);
    const CrissCrossMesh& M = *qf.mesh;
    const bool interior_only = a1 + a2 == 2;

    std::vector<std::array<double, 3>> lam;
    for (int i = 1; i <= denom - 2; ++i)
        for (int j = 1; i + j <= denom - 1; ++j)
            lam.push_back({double(i) / denom, double(j) / denom, double(denom - i - j) / denom});
    if (!interior_only) {
        lam.push_back({1, 0, 0});
        lam.push_back({0, 1, 0});
        lam.push_back({0, 0, 1});
    }

    const int workers = std::max(1, std::min(thread_count(), M.tri_count()));
    std::vector<double> part(workers, 0.0);
    parallel_for(workers, [&](int w) {
        double best = 0.0;
        for (int t = w; t < M.tri_count(); t += workers) {
            BBPatch p = patch_of(qf, t);
            for (const auto& l : lam) {
                Pt P{l[0] * p.V[0].x + l[1] * p.V[1].x + l[2] * p.V[2].x,
                     l[0] * p.V[0].y + l[1] * p.V[1].y + l[2] * p.V[2].y};
                best = std::max(best, std::abs(diff_patch_value(p, P, a1, a2) - df(P)));
            }
        }
        part[w] = best;
    });
    ErrorReport R;
    R.kind = kind;
    R.alphas = std::to_string(a1) + std::to_string(a2);
    for (double v : part) R.measured = std::max(R.measured, v);
    R.sample_rule = "bary-d" + std::to_string(denom) +
                    (interior_only ? "-interior" : "-interior+vertices");
    return R;
}

// Sampled lower estimate of omega(g,t): max |g(M)-g(P)| over lattice pairs at
// Euclidean distance <= t.
template <class G>
double modulus(G&& g, double t, const Rect& R, int density = 51) {
    if (!(t > 0)) throw config_error("modulus needs t > 0, got " + fmt17(t));
    if (density < 2) throw config_error("modulus grid density must be >= 2");
    const double sx = (R.x1 - R.x0) / (density - 1), sy = (R.y1 - R.y0) / (density - 1);
    std::vector<double> v(std::size_t(density) * density);
    for (int i = 0; i < density; ++i)
        for (int j = 0; j < density; ++j) {
            double val = g(Pt{R.x0 + i * sx, R.y0 + j * sy});
            if (!std::isfinite(val)) throw science_error("non-finite sample in modulus");
            v[std::size_t(i) * density + j] = val;
        }
    const int wi = sx > 0 ? std::min(density - 1, int(t / sx)) : density - 1;
    const int wj = sy > 0 ? std::min(density - 1, int(t / sy)) : density - 1;
    double best = 0.0;
    for (int i = 0; i < density; ++i)
        for (int j = 0; j < density; ++j) {
            const double base = v[std::size_t(i) * density + j];
            for (int di = 0; di <= wi && i + di < density; ++di)
                for (int dj = di == 0 ? 1 : -wj; dj <= wj; ++dj) {
                    int jj = j + dj;
                    if (jj < 0 || jj >= density) continue;
                    double dx = di * sx, dy = dj * sy;
                    if (dx * dx + dy * dy > t * t) continue;
                    best = std::max(best, std::abs(v[std::size_t(i + di) * density + jj] - base));
                }
        }
    return best;
}

inline const std::vector<std::string>& all_theorems() {
    static const std::vector<std::string> ids = {"T1",  "T2",  "T3i", "T3ii", "T4",
                                                 "T5i", "T5ii", "T6i", "T6ii"};
    return ids;
}

// Whether f carries the derivative/modulus metadata theorem `th` consumes.
inline bool theorem_applicable(const std::string& th, const TestFunction& f) {
    if (th == "T1") return f.has_omega(0);
    if (th == "T2") return f.has_omega(1);
    if (th == "T3i") return f.has_omega(2);
    if (th == "T3ii") return f.has_d3();
    if (th == "T4") return f.has_omega(1) && f.dmax >= 1;
    if (th == "T5i") return f.has_omega(2) && f.dmax >= 1;
    if (th == "T5ii") return f.has_d3() && f.dmax >= 1;
    if (th == "T6i") return f.has_omega(2) && f.dmax >= 2;
    if (th == "T6ii") return f.has_d3() && f.dmax >= 2;
    throw config_error("unknown theorem id '" + th + "'");
}

// Measures the theorem's left-hand side and evaluates its right-hand side
// with the proven constants; the modulus entering the bound is the analytic
// upper bound, the sampled estimate is attached for reference.
inline ErrorReport check_bound(const std::string& th, const Operator& op, const TestFunction& f,
                               int denom = 6) {
    const CrissCrossMesh& M = op.mesh();
    const MeshRatios mr = mesh_ratios(M);
    const Rect dom = domain_rect(M);
    const double h = mr.h, g = mr.gamma, t = mr.h / 2.0;
    SplineFunction qf = apply(op, f);

    auto measure = [&](std::initializer_list<std::pair<int, int>> as, ErrorReport& R) {
        bool first = true;
        for (auto [a1, a2] : as) {
            ErrorReport e = sup_error(f, qf, op.kind, a1, a2, denom);
            R.measured = std::max(R.measured, e.measured);
            R.alphas += (first ? "" : ",") + e.alphas;
            R.sample_rule = e.sample_rule;
            first = false;
        }
    };
    auto omega_s = [&](int s, ErrorReport& R) {
        R.omega_analytic = f.omega_upper(s, t, dom);
        if (f.dmax >= s) {
            double w = 0.0;
            for (int a1 = 0; a1 <= s; ++a1) w = std::max(w, modulus(f.deriv(a1, s - a1), t, dom));
            R.omega_sampled = w;
        }
        return R.omega_analytic;
    };

    ErrorReport R;
    R.kind = op.kind;
    R.theorem = th;
    auto C = [&](const char* key) { return bound_constant(key, op.kind); };
    if (th == "T1") {
        measure({{0, 0}}, R);
        R.bound = C("C0") * omega_s(0, R);
    } else if (th == "T2") {
        measure({{0, 0}}, R);
        R.bound = C("C1") * h * omega_s(1, R);
    } else if (th == "T3i") {
        measure({{0, 0}}, R);
        R.bound = C("C2") * h * h * omega_s(2, R);
    } else if (th == "T3ii") {
        measure({{0, 0}}, R);
        R.d3 = f.d3_norm(dom);
        R.bound = C("C3") * h * h * h * R.d3;
    } else if (th == "T4") {
        measure({{1, 0}, {0, 1}}, R);
        R.bound = (1.0 + C("C1bar") * g) * omega_s(1, R);
    } else if (th == "T5i") {
        measure({{1, 0}, {0, 1}}, R);
        R.bound = (1.0 + C("C2bar") * g) * h * omega_s(2, R);
    } else if (th == "T5ii") {
        measure({{1, 0}, {0, 1}}, R);
        R.d3 = f.d3_norm(dom);
        R.bound = C("C3bar") * g * h * h * R.d3;
    } else if (th == "T6i") {
        measure({{2, 0}, {1, 1}, {0, 2}}, R);
        R.bound = (1.0 + C("D2") * g * g) * omega_s(2, R);
    } else if (th == "T6ii") {
        measure({{2, 0}, {1, 1}, {0, 2}}, R);
        R.d3 = f.d3_norm(dom);
        R.bound = (1.0 + C("D3") * g * g) * h * R.d3;
    } else {
        throw config_error("unknown theorem id '" + th + "'");
    }
    R.margin = R.bound - R.measured;
    R.pass = R.measured <= R.bound;
    return R;
}

// Max of the Lebesgue function over an nx-by-ny inclusive lattice on the domain.
inline double lebesgue_sup(const Operator& op, int nx = 50, int ny = 50) {
    if (nx < 2 || ny < 2) throw config_error("lebesgue lattice must be at least 2x2");
    const Rect R = domain_rect(op.mesh());
    const int workers = std::max(1, std::min(thread_count(), nx));
    std::vector<double> part(workers, 0.0);
    parallel_for(workers, [&](int w) {
        double best = 0.0;
        for (int i = w; i < nx; i += workers)
            for (int j = 0; j < ny; ++j) {
                Pt P{R.x0 + i * (R.x1 - R.x0) / (nx - 1), R.y0 + j * (R.y1 - R.y0) / (ny - 1)};
                best = std::max(best, lebesgue_function(op, P));
            }
        part[w] = best;
    });
    double sup = 0.0;
    for (double v : part) sup = std::max(sup, v);
    return sup;
}

struct StudyConfig {
    OpKind kind = OpKind::s2;
    std::string function = "exp-sum";
    bool uniform = true;
    int m0 = 4;
    int levels = 0;
    Rect domain{0, 1, 0, 1};       // uniform meshes only
    double gamma = 2.0;            // random meshes only
    std::uint64_t seed = 0;        // random meshes only
};

struct ConvergenceRow {
    int level = 0, m = 0, n = 0;
    double h = 0, delta = 0, gamma = 0;
    std::array<double, 6> err{};  // alpha order: 00, 10, 01, 20, 11, 02
    std::array<double, 6> ord{};  // NaN on the first level
};

inline std::uint64_t level_seed(std::uint64_t seed, int level) {
    return seed ^ (0x9E3779B97F4A7C15ull * std::uint64_t(level + 1));
}

inline std::vector<ConvergenceRow> convergence_study(const StudyConfig& cfg) {
    if (cfg.levels < 1) throw config_error("study needs levels >= 1");
    if (cfg.m0 < 2) throw config_error("study needs m0 >= 2");
    TestFunction f = make_function(cfg.function);
    if (f.dmax < 2)
        throw config_error("study function '" + cfg.function + "' lacks second derivatives");
    static constexpr int A[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};

    std::vector<ConvergenceRow> rows;
    for (int k = 0; k < cfg.levels; ++k) {
        const int mn = cfg.m0 << k;
        CrissCrossMesh M =
            cfg.uniform
                ? build_mesh(uniform_partition(cfg.domain.x0, cfg.domain.x1, mn),
                             uniform_partition(cfg.domain.y0, cfg.domain.y1, mn))
                : random_mesh(mn, mn, cfg.gamma, level_seed(cfg.seed, k));
        BasisFamily F = build_family(M);
        Operator op = make_operator(F, cfg.kind);
        SplineFunction qf = apply(op, f);
        MeshRatios mr = mesh_ratios(M);

        ConvergenceRow row;
        row.level = k;
        row.m = row.n = mn;
        row.h = mr.h;
        row.delta = mr.delta;
        row.gamma = mr.gamma;
        for (int q = 0; q < 6; ++q)
            row.err[q] = sup_error(f, qf, cfg.kind, A[q][0], A[q][1]).measured;
        for (int q = 0; q < 6; ++q) {
            row.ord[q] = std::numeric_limits<double>::quiet_NaN();
            if (k > 0 && rows.back().err[q] > 0 && row.err[q] > 0)
                row.ord[q] = std::log(rows.back().err[q] / row.err[q]) /
                             std::log(rows.back().h / row.h);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qi
