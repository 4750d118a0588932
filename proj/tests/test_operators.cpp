#include <catch2/catch_amalgamated.hpp>

#include "qi/operators.hpp"

using namespace qi;
using Catch::Matchers::WithinAbs;

namespace {

// interior barycentric samples (denominator 6) plus the three vertices
std::vector<Pt> tri_samples(const CrissCrossMesh& M, int t) {
    std::vector<Pt> out;
    const auto& V = M.tri_verts[t];
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; a + b <= 5; ++b) {
            double l1 = a / 6.0, l2 = b / 6.0, l3 = 1.0 - l1 - l2;
            out.push_back({l1 * V[0].x + l2 * V[1].x + l3 * V[2].x,
                           l1 * V[0].y + l2 * V[1].y + l3 * V[2].y});
        }
    for (const Pt& v : V) out.push_back(v);
    return out;
}

double sup_dev(const Operator& op, const SplineFunction& sf, const std::function<double(Pt)>& f) {
    double worst = 0.0;
    const CrissCrossMesh& M = op.mesh();
    for (int t = 0; t < M.tri_count(); ++t) {
        BBPatch p = patch_of(sf, t);
        for (Pt P : tri_samples(M, t))
            worst = std::max(worst, std::abs(diff_patch_value(p, P, 0, 0) - f(P)));
    }
    return worst;
}

}  // namespace

TEST_CASE("both operators reproduce quadratics on random meshes") {
    for (auto [mk, nk, gamma, seed] :
         {std::tuple{5, 4, 3.0, 7ull}, std::tuple{4, 6, 2.0, 11ull}}) {
        CrissCrossMesh M = random_mesh(mk, nk, gamma, seed);
        BasisFamily F = build_family(M);
        for (OpKind k : {OpKind::s2, OpKind::w2star}) {
            Operator op = make_operator(F, k);
            for (int a = 0; a <= 2; ++a)
                for (int b = 0; a + b <= 2; ++b) {
                    Poly2 e = Poly2::monomial(a, b);
                    SplineFunction sf = apply(op, [&](Pt P) { return e(P); });
                    REQUIRE(sup_dev(op, sf, [&](Pt P) { return e(P); }) <= 2e-9);
                }
        }
    }
}

TEST_CASE("application is linear in the data") {
    CrissCrossMesh M = build_mesh(build_partition({0.0, 0.4, 1.0, 1.7, 2.0}),
                                  build_partition({0.0, 0.6, 1.1, 2.0}));
    BasisFamily Fam = build_family(M);
    auto f = [](Pt P) { return std::sin(3 * P.x) * std::exp(P.y); };
    auto g = [](Pt P) { return P.x * P.x * P.y - 2.0 * P.y; };
    for (OpKind k : {OpKind::s2, OpKind::w2star}) {
        Operator op = make_operator(Fam, k);
        SplineFunction qf = apply(op, f), qg = apply(op, g);
        SplineFunction qc = apply(op, [&](Pt P) { return 2.0 * f(P) + 3.0 * g(P); });
        for (int d = 0; d < M.dp_count(); ++d) {
            double want = 2.0 * qf.coef[d] + 3.0 * qg.coef[d];
            REQUIRE_THAT(qc.coef[d], WithinAbs(want, 1e-12 * (1.0 + std::abs(want))));
        }
    }
}

TEST_CASE("coefficients depend only on nearby data") {
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, 7), uniform_partition(0, 1, 7));
    BasisFamily F = build_family(M);
    auto base = [](Pt P) { return std::cos(2 * P.x + P.y); };
    Pt hot = M.center(1, 1);
    auto bumped = [&](Pt P) {
        double d = std::hypot(P.x - hot.x, P.y - hot.y);
        return base(P) + std::max(0.0, 1.0 - d / 0.02);
    };
    for (OpKind k : {OpKind::s2, OpKind::w2star}) {
        Operator op = make_operator(F, k);
        SplineFunction q1 = apply(op, base), q2 = apply(op, bumped);
        // the bump is sampled: coefficients near its cell differ
        bool differs = false;
        for (int d : M.tri_dp[M.tid(1, 1, 3)]) differs |= q1.coef[d] != q2.coef[d];
        REQUIRE(differs);
        // ... but the patches four cells away are bit-identical
        for (int l = 1; l <= 4; ++l)
            for (int d : M.tri_dp[M.tid(4, 4, l)]) REQUIRE(q1.coef[d] == q2.coef[d]);
    }
}

TEST_CASE("distinct data-site counts follow the closed forms") {
    for (auto [mk, nk] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{2, 3}, std::pair{4, 5},
                          std::pair{6, 6}, std::pair{5, 3}}) {
        CrissCrossMesh M = build_mesh(uniform_partition(0, 1, mk), uniform_partition(0, 2, nk));
        BasisFamily F = build_family(M);
        REQUIRE(data_site_count(make_operator(F, OpKind::s2)) == mk * nk + 2 * mk + 2 * nk + 4);
        REQUIRE(data_site_count(make_operator(F, OpKind::w2star)) ==
                2 * mk * nk + 3 * mk + 3 * nk + 1);
    }
}

TEST_CASE("cubic deviation stays within the sharp uniform budget") {
    const int m = 8;
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, m), uniform_partition(0, 1, m));
    BasisFamily F = build_family(M);
    Operator op = make_operator(F, OpKind::s2);
    SplineFunction sf = apply(op, [](Pt P) { return P.x * P.x * P.x; });
    double dev = sup_dev(op, sf, [](Pt P) { return P.x * P.x * P.x; });
    double h = 1.0 / m;
    REQUIRE(dev > 1e-6);                     // cubics are not reproduced
    REQUIRE(dev <= (1.0 / 8.0) * h * h * h * 6.0);  // eighth of h^3 times |f'''|
}

TEST_CASE("evaluate handles derivatives and edge flags") {
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, 2), uniform_partition(0, 1, 2));
    BasisFamily F = build_family(M);
    Operator op = make_operator(F, OpKind::s2);
    SplineFunction sf = apply(op, [](Pt P) { return P.x * P.x * P.y * P.y; });

    // the mixed second derivative of a quadratic patch is one constant per triangle
    double v1 = evaluate(sf, {0.30, 0.15}, 1, 1);
    double v2 = evaluate(sf, {0.32, 0.14}, 1, 1);
    REQUIRE_THAT(v1, WithinAbs(v2, 1e-12 * (1.0 + std::abs(v1))));

    bool flag = true;
    evaluate(sf, {0.30, 0.15}, 1, 1, &flag);
    REQUIRE_FALSE(flag);  // strictly interior
    evaluate(sf, {0.30, 0.50}, 2, 0, &flag);
    REQUIRE(flag);  // on a knot line
    evaluate(sf, {0.25, 0.25}, 0, 2, &flag);
    REQUIRE(flag);  // at a cell center
    evaluate(sf, {0.30, 0.50}, 0, 0, &flag);
    REQUIRE_FALSE(flag);  // values are continuous; no flag for order < 2
}

TEST_CASE("non-finite samples are rejected") {
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, 2), uniform_partition(0, 1, 2));
    BasisFamily F = build_family(M);
    Operator op = make_operator(F, OpKind::w2star);
    REQUIRE_THROWS_AS(apply(op, [](Pt) { return std::numeric_limits<double>::infinity(); }),
                      science_error);
    REQUIRE_THROWS_AS(apply(op, [](Pt P) { return P.x > 0.9 ? std::nan("") : 1.0; }),
                      science_error);
}

TEST_CASE("the Lebesgue function never drops below one") {
    CrissCrossMesh M = random_mesh(4, 5, 2.5, 3);
    BasisFamily F = build_family(M);
    std::mt19937_64 rng(91);
    for (OpKind k : {OpKind::s2, OpKind::w2star}) {
        Operator op = make_operator(F, k);
        for (int s = 0; s < 30; ++s) {
            Pt P{uniform01(rng()), uniform01(rng())};
            REQUIRE(lebesgue_function(op, P) >= 1.0 - 1e-9);
        }
    }
}

TEST_CASE("operator names parse and print") {
    REQUIRE(parse_op("s2") == OpKind::s2);
    REQUIRE(parse_op("w2star") == OpKind::w2star);
    REQUIRE(std::string(op_name(OpKind::s2)) == "s2");
    REQUIRE(std::string(op_name(OpKind::w2star)) == "w2star");
    REQUIRE_THROWS_AS(parse_op("S2"), config_error);
    REQUIRE_THROWS_AS(parse_op(""), config_error);
}
