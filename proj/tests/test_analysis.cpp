#include <catch2/catch_amalgamated.hpp>

#include "qi/analysis.hpp"

using namespace qi;
using Catch::Matchers::WithinAbs;

TEST_CASE("bound constants match the published table") {
    REQUIRE(bound_constant("C0", OpKind::s2) == 20.5);
    REQUIRE(bound_constant("C0", OpKind::w2star) == 12.0);
    REQUIRE(bound_constant("C3", OpKind::s2) == 0.125);
    REQUIRE(bound_constant("C3", OpKind::w2star) == 1.0 / 12.0);
    REQUIRE(bound_constant("C1bar", OpKind::s2) == 120.0);
    REQUIRE(bound_constant("C1bar", OpKind::w2star) == 70.0);
    REQUIRE(bound_constant("D2", OpKind::s2) == 183.0);
    REQUIRE(bound_constant("D2", OpKind::w2star) == 97.5);
    REQUIRE(bound_constant("C2pp", OpKind::s2) == 269.0 / 48.0);
    REQUIRE(bound_constant("C2pp", OpKind::w2star) == 65.0 / 24.0);
    REQUIRE_THROWS_AS(bound_constant("C9", OpKind::s2), config_error);
}

TEST_CASE("sampled modulus matches hand values") {
    Rect R{0, 1, 0, 1};
    REQUIRE(modulus([](Pt) { return 4.0; }, 0.3, R) == 0.0);
    // grid step 0.02; max increment of x over distance 0.1 is hit exactly
    REQUIRE_THAT(modulus([](Pt P) { return P.x; }, 0.1, R), WithinAbs(0.1, 1e-13));
    REQUIRE_THAT(modulus([](Pt P) { return std::abs(P.x - 0.5); }, 0.1, R),
                 WithinAbs(0.1, 1e-13));
    auto g = [](Pt P) { return std::sin(5 * P.x) * std::cos(3 * P.y); };
    REQUIRE(modulus(g, 0.05, R) <= modulus(g, 0.1, R));
    REQUIRE(modulus(g, 0.1, R) <= modulus(g, 0.4, R));
    REQUIRE_THROWS_AS(modulus([](Pt) { return std::nan(""); }, 0.1, R), science_error);
    REQUIRE_THROWS_AS(modulus(g, 0.0, R), config_error);
    REQUIRE_THROWS_AS(modulus(g, 0.1, R, 1), config_error);
}

TEST_CASE("sup error vanishes on reproduced quadratics") {
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, 6), uniform_partition(0, 1, 6));
    BasisFamily F = build_family(M);
    Operator op = make_operator(F, OpKind::s2);
    TestFunction f = make_function("poly:1,1=1;0,1=-2;0,0=0.5");
    SplineFunction qf = apply(op, f);
    for (auto [a1, a2] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{2, 0}, std::pair{1, 1}}) {
        ErrorReport R = sup_error(f, qf, OpKind::s2, a1, a2);
        REQUIRE(R.measured <= 1e-10);
    }
}

TEST_CASE("sup error sampling rules and refinement") {
    const int m = 8;
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, m), uniform_partition(0, 1, m));
    BasisFamily F = build_family(M);
    Operator op = make_operator(F, OpKind::s2);

    TestFunction cubic = make_function("poly:3,0=1");
    SplineFunction qc = apply(op, cubic);
    ErrorReport R6 = sup_error(cubic, qc, OpKind::s2, 0, 0);
    REQUIRE(R6.sample_rule == "bary-d6-interior+vertices");
    REQUIRE(R6.alphas == "00");
    REQUIRE(R6.measured > 1e-6);
    REQUIRE(R6.measured <= 0.125 * 6.0 / double(m * m * m));

    // the denser lattice contains the coarser one, so the estimate cannot drop
    ErrorReport R12 = sup_error(cubic, qc, OpKind::s2, 0, 0, 12);
    REQUIRE(R12.sample_rule == "bary-d12-interior+vertices");
    REQUIRE(R12.measured >= R6.measured);

    TestFunction f = make_function("exp-sum");
    SplineFunction qf = apply(op, f);
    ErrorReport R2 = sup_error(f, qf, OpKind::s2, 1, 1);
    REQUIRE(R2.sample_rule == "bary-d6-interior");
    REQUIRE(R2.alphas == "11");
    REQUIRE_THROWS_AS(sup_error(f, qf, OpKind::s2, 0, 0, 2), config_error);
}

TEST_CASE("theorem applicability follows function metadata") {
    TestFunction es = make_function("exp-sum"), fr = make_function("franke"),
                 ar = make_function("abs-ridge:0.5");
    for (const std::string& th : all_theorems()) {
        REQUIRE(theorem_applicable(th, es));
        REQUIRE_FALSE(theorem_applicable(th, fr));
        REQUIRE(theorem_applicable(th, ar) == (th == "T1"));
    }
    REQUIRE(all_theorems().size() == 9);
    REQUIRE_THROWS_AS(theorem_applicable("T7", es), config_error);
}

TEST_CASE("error bounds hold on uniform meshes") {
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, 8), uniform_partition(0, 1, 8));
    BasisFamily F = build_family(M);
    TestFunction f = make_function("exp-sum");
    for (OpKind k : {OpKind::s2, OpKind::w2star}) {
        Operator op = make_operator(F, k);
        for (const std::string& th : all_theorems()) {
            ErrorReport R = check_bound(th, op, f);
            INFO(th << " " << op_name(k) << ": measured " << R.measured << " bound " << R.bound);
            REQUIRE(R.pass);
            REQUIRE(R.margin >= 0.0);
            REQUIRE(R.bound > 0.0);
            REQUIRE(R.omega_analytic >= -1.0);
            if (R.omega_sampled >= 0.0 && R.omega_analytic >= 0.0)
                REQUIRE(R.omega_sampled <= R.omega_analytic + 1e-12);
        }
        ErrorReport t4 = check_bound("T4", op, f);
        REQUIRE(t4.alphas == "10,01");
        ErrorReport t6 = check_bound("T6i", op, f);
        REQUIRE(t6.alphas == "20,11,02");
    }
}

TEST_CASE("error bounds hold on a skewed random mesh") {
    CrissCrossMesh M = random_mesh(8, 8, 3.0, 5);
    BasisFamily F = build_family(M);
    TestFunction f = make_function("sine");
    Operator op = make_operator(F, OpKind::s2);
    for (const std::string& th : all_theorems()) {
        ErrorReport R = check_bound(th, op, f);
        INFO(th << ": measured " << R.measured << " bound " << R.bound);
        REQUIRE(R.pass);
    }
}

TEST_CASE("ridge function satisfies the continuity bound") {
    CrissCrossMesh M = build_mesh(uniform_partition(0, 1, 8), uniform_partition(0, 1, 8));
    BasisFamily F = build_family(M);
    TestFunction f = make_function("abs-ridge:0.47");
    for (OpKind k : {OpKind::s2, OpKind::w2star}) {
        ErrorReport R = check_bound("T1", make_operator(F, k), f);
        REQUIRE(R.pass);
        REQUIRE(R.measured > 0.0);
        REQUIRE_THAT(R.omega_analytic, WithinAbs(1.0 / 16.0, 1e-15));
    }
}

TEST_CASE("lebesgue sup stays within the proven caps") {
    CrissCrossMesh M = build_mesh(build_partition({0.0, 0.3, 0.55, 1.0}),
                                  build_partition({0.0, 0.5, 0.8, 1.0}));
    BasisFamily F = build_family(M);
    Operator s2 = make_operator(F, OpKind::s2);
    Operator ws = make_operator(F, OpKind::w2star);
    double ls = lebesgue_sup(s2, 40, 40), lw = lebesgue_sup(ws, 40, 40);
    REQUIRE(ls >= 1.0);
    REQUIRE(ls <= 5.0 + 1e-9);
    REQUIRE(lw >= 1.0);
    REQUIRE(lw <= 3.0 + 1e-9);
    REQUIRE_THROWS_AS(lebesgue_sup(s2, 1, 5), config_error);
}

TEST_CASE("uniform refinement shows the expected orders") {
    StudyConfig cfg;
    cfg.kind = OpKind::s2;
    cfg.function = "exp-sum";
    cfg.uniform = true;
    cfg.m0 = 4;
    cfg.levels = 3;
    auto rows = convergence_study(cfg);
    REQUIRE(rows.size() == 3);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        REQUIRE(rows[k].m == 4 << k);
        if (k > 0) REQUIRE_THAT(rows[k - 1].h / rows[k].h, WithinAbs(2.0, 1e-12));
        REQUIRE_THAT(rows[k].gamma, WithinAbs(1.0, 1e-12));
    }
    for (int q = 0; q < 6; ++q) REQUIRE(std::isnan(rows[0].ord[q]));
    REQUIRE_THAT(rows[2].ord[0], WithinAbs(3.0, 0.5));   // value: third order
    REQUIRE_THAT(rows[2].ord[1], WithinAbs(2.0, 0.5));   // gradient: second order
    REQUIRE_THAT(rows[2].ord[3], WithinAbs(1.0, 0.45));  // second derivatives: first order
}

TEST_CASE("random refinement is seeded and bounded") {
    StudyConfig cfg;
    cfg.kind = OpKind::w2star;
    cfg.function = "sine";
    cfg.uniform = false;
    cfg.m0 = 4;
    cfg.levels = 2;
    cfg.gamma = 2.0;
    cfg.seed = 42;
    auto r1 = convergence_study(cfg);
    auto r2 = convergence_study(cfg);
    REQUIRE(r1.size() == 2);
    for (std::size_t k = 0; k < r1.size(); ++k) {
        REQUIRE(r1[k].gamma <= cfg.gamma + 1e-12);
        for (int q = 0; q < 6; ++q) {
            REQUIRE(r1[k].err[q] == r2[k].err[q]);
            REQUIRE(r1[k].err[q] > 0.0);
        }
    }
    REQUIRE(level_seed(42, 0) != level_seed(42, 1));
}

TEST_CASE("study configuration is validated") {
    StudyConfig cfg;
    cfg.levels = 0;
    REQUIRE_THROWS_AS(convergence_study(cfg), config_error);
    cfg.levels = 1;
    cfg.m0 = 1;
    REQUIRE_THROWS_AS(convergence_study(cfg), config_error);
    cfg.m0 = 2;
    cfg.function = "abs-ridge:0.5";
    REQUIRE_THROWS_AS(convergence_study(cfg), config_error);
    cfg.function = "nope";
    REQUIRE_THROWS_AS(convergence_study(cfg), config_error);
}
