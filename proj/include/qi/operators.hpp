#pragma once

#include <map>

#include "qi/basis.hpp"

namespace qi {

enum class OpKind { s2, w2star };

inline const char* op_name(OpKind k) { return k == OpKind::s2 ? "s2" : "w2star"; }

inline OpKind parse_op(const std::string& s) {
    if (s == "s2") return OpKind::s2;
    if (s == "w2star") return OpKind::w2star;
    throw config_error("unknown operator '" + s + "' (expected s2 or w2star)");
}

// A quasi-interpolant: the basis family plus one coefficient functional per
// index, with sites interned so the census and Lebesgue sums are over
// distinct data points.
struct Operator {
    const BasisFamily* family = nullptr;
    OpKind kind = OpKind::s2;
    std::vector<Pt> sites;  // distinct data sites
    std::vector<std::vector<std::pair<int, double>>> fun;  // per index: (site id, weight)

    const CrissCrossMesh& mesh() const { return *family->mesh; }
    int idx(int i, int j) const { return family->idx(i, j); }
};

inline Operator make_operator(const BasisFamily& F, OpKind kind) {
    const CrissCrossMesh& M = *F.mesh;
    Operator op;
    op.family = &F;
    op.kind = kind;
    op.fun.resize((M.m + 2) * (M.n + 2));
    std::map<std::pair<double, double>, int> intern;
    auto site_id = [&](Pt P) {
        auto [it, fresh] = intern.try_emplace({P.x, P.y}, int(op.sites.size()));
        if (fresh) op.sites.push_back(P);
        return it->second;
    };
    S2Coefficients C;
    if (kind == OpKind::s2) C = s2_coefficients(M);
    for (int i = 0; i <= M.m + 1; ++i)
        for (int j = 0; j <= M.n + 1; ++j) {
            Functional mu = kind == OpKind::s2 ? s2_functional(M, C, i, j)
                                               : w2star_functional(M, i, j);
            auto& lst = op.fun[op.idx(i, j)];
            for (const auto& [P, w] : mu.sites) lst.emplace_back(site_id(P), w);
        }
    return op;
}

inline int data_site_count(const Operator& op) { return int(op.sites.size()); }

// Qf as a mesh-wide BB net, accumulated coefficient-wise from the cached basis.
template <class F>
SplineFunction apply(const Operator& op, F&& f) {
    const CrissCrossMesh& M = op.mesh();
    std::vector<double> val(op.sites.size());
    for (std::size_t k = 0; k < op.sites.size(); ++k) {
        val[k] = f(op.sites[k]);
        if (!std::isfinite(val[k]))
            throw science_error("function returned non-finite value " + fmt17(val[k]) +
                                " at data site (" + fmt17(op.sites[k].x) + "," +
                                fmt17(op.sites[k].y) + ")");
    }
    SplineFunction sf;
    sf.mesh = &M;
    sf.coef.assign(M.dp_count(), 0.0);
    for (int i = 0; i <= M.m + 1; ++i)
        for (int j = 0; j <= M.n + 1; ++j) {
            double mu = 0.0;
            for (auto [s, w] : op.fun[op.idx(i, j)]) mu += w * val[s];
            if (mu == 0.0) continue;
            for (auto [d, v] : op.family->at(i, j).net) sf.coef[d] += mu * v;
        }
    return sf;
}

// Point/derivative evaluation.  Second derivatives are discontinuous across
// edges; when P lies on one (up to barycentric 1e-12) the value comes from
// locate's tie-break triangle and *edge_flag is set.
inline double evaluate(const SplineFunction& sf, Pt P, int a1 = 0, int a2 = 0,
                       bool* edge_flag = nullptr) {
    const CrissCrossMesh& M = *sf.mesh;
    TriangleRef T = locate(M, P);
    int t = M.tid(T.r, T.s, T.l);
    if (edge_flag) {
        *edge_flag = false;
        if (a1 + a2 == 2) {
            auto lam = detail::bary_raw(M.tri_verts[t], P);
            if (std::min({lam[0], lam[1], lam[2]}) < 1e-12) *edge_flag = true;
        }
    }
    return diff_patch_value(patch_of(sf, t), P, a1, a2);
}

// Lambda(P) = sum over distinct data sites of |sum_ij w_ij,site B_ij(P)|:
// the pointwise operator norm over the unit ball of bounded functions.
inline double lebesgue_function(const Operator& op, Pt P) {
    const CrissCrossMesh& M = op.mesh();
    TriangleRef T = locate(M, P);
    int t = M.tid(T.r, T.s, T.l);
    std::map<int, double> per_site;
    for (auto [i, j] : active_indices(T)) {
        double b = diff_patch_value(bspline_patch(M, op.family->at(i, j), t), P, 0, 0);
        if (b == 0.0) continue;
        for (auto [s, w] : op.fun[op.idx(i, j)]) per_site[s] += w * b;
    }
    double sum = 0.0;
    for (const auto& [s, v] : per_site) sum += std::abs(v);
    return sum;
}

}  // namespace qi
