#include <iostream>

#include <CLI11.hpp>

#include "qi/analysis.hpp"
#include "qi/io.hpp"
#include "qi/meshconfig.hpp"

using nlohmann::json;

namespace {

json mesh_summary(const qi::CrissCrossMesh& M) {
    qi::MeshRatios r = qi::mesh_ratios(M);
    return {{"m", M.m}, {"n", M.n}, {"h", r.h}, {"delta", r.delta}, {"gamma", r.gamma}};
}

int run_basis_check(const std::string& mesh_arg, double tol) {
    qi::CrissCrossMesh M = qi::mesh_from_arg(mesh_arg);
    qi::BasisFamily F = qi::build_family(M);
    qi::BasisDiagnostics D = qi::basis_diagnostics(F);
    const bool pass = D.negativity >= -tol && D.pou <= tol &&
                      D.dependence <= tol * D.dependence_scale && D.trace <= tol && D.c1 <= tol;
    json j{{"mesh", mesh_summary(M)},
           {"tolerance", tol},
           {"negativity", D.negativity},
           {"partition_of_unity", D.pou},
           {"dependence", D.dependence},
           {"dependence_scale", D.dependence_scale},
           {"boundary_trace", D.trace},
           {"c1_residual", D.c1},
           {"normalization_residual", F.normalization_residual},
           {"lemma1", json{{"d1_ratio", D.lemma1_d1}, {"d2_ratio", D.lemma1_d2}}},
           {"pass", pass}};
    std::cout << j.dump(2) << "\n";
    return pass ? 0 : 1;
}

int run_eval(const std::string& mesh_arg, const std::string& op_s, const std::string& fn,
             const std::string& points, const std::string& deriv, const std::string& out) {
    int a1 = -1, a2 = -1;
    if (deriv.size() == 3 && deriv[1] == ',' && deriv[0] >= '0' && deriv[0] <= '2' &&
        deriv[2] >= '0' && deriv[2] <= '2') {
        a1 = deriv[0] - '0';
        a2 = deriv[2] - '0';
    }
    if (a1 < 0 || a1 + a2 > 2)
        throw qi::config_error("--deriv must be a1,a2 with a1+a2 <= 2, got '" + deriv + "'");
    qi::TestFunction f = qi::make_function(fn);
    f.deriv(a1, a2);  // fail early if the function lacks this derivative

    qi::CrissCrossMesh M = qi::mesh_from_arg(mesh_arg);
    std::vector<qi::Pt> pts = qi::read_points_csv(points);
    qi::BasisFamily F = qi::build_family(M);
    qi::Operator op = qi::make_operator(F, qi::parse_op(op_s));
    qi::SplineFunction qf = qi::apply(op, f);

    const bool flagged = a1 + a2 == 2;
    std::string csv = flagged ? "x,y,value,edge_flag\n" : "x,y,value\n";
    for (qi::Pt P : pts) {
        bool edge = false;
        double v = qi::evaluate(qf, P, a1, a2, &edge);
        csv += qi::fmt17(P.x) + "," + qi::fmt17(P.y) + "," + qi::fmt17(v);
        if (flagged) csv += edge ? ",1" : ",0";
        csv += "\n";
    }
    qi::atomic_write(out, csv);
    return 0;
}

int run_norms(const std::string& mesh_arg, const std::string& op_s, int samples, bool as_json) {
    qi::CrissCrossMesh M = qi::mesh_from_arg(mesh_arg);
    qi::BasisFamily F = qi::build_family(M);
    qi::Operator op = qi::make_operator(F, qi::parse_op(op_s));
    const double sup = qi::lebesgue_sup(op, samples, samples);
    const double cap = op.kind == qi::OpKind::s2 ? 5.0 : 3.0;
    const bool pass = sup <= cap + 1e-9;
    if (as_json) {
        json j{{"mesh", mesh_summary(M)},
               {"operator", qi::op_name(op.kind)},
               {"samples", samples},
               {"lebesgue_sup", sup},
               {"cap", cap},
               {"data_sites", qi::data_site_count(op)},
               {"pass", pass}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "operator " << qi::op_name(op.kind) << " on " << M.m << "x" << M.n
                  << " mesh\n"
                  << "lebesgue sup over " << samples << "x" << samples
                  << " samples: " << qi::fmt17(sup) << " (cap " << qi::fmt17(cap) << ")\n"
                  << "data sites: " << qi::data_site_count(op) << "\n";
    }
    if (!pass)
        std::cerr << "norm check failed: " << qi::fmt17(sup) << " > " << qi::fmt17(cap) << "\n";
    return pass ? 0 : 1;
}

json report_json(const qi::ErrorReport& R) {
    auto opt = [](double v) { return v < 0 ? json() : json(v); };
    return {{"theorem", R.theorem},
            {"operator", qi::op_name(R.kind)},
            {"alphas", R.alphas},
            {"measured", R.measured},
            {"bound", R.bound},
            {"margin", R.margin},
            {"omega_analytic", opt(R.omega_analytic)},
            {"omega_sampled", opt(R.omega_sampled)},
            {"d3_norm", opt(R.d3)},
            {"sample_rule", R.sample_rule},
            {"pass", R.pass}};
}

int run_bounds(const std::string& config_arg, const std::string& out) {
    json cfg = qi::json_from_arg(config_arg, "bounds config");
    qi::detail::reject_unknown(cfg, {"mesh", "operator", "function", "theorems", "denom"},
                               "bounds config");
    if (!cfg.contains("mesh")) throw qi::config_error("bounds config is missing \"mesh\"");
    qi::CrissCrossMesh M = qi::mesh_from_json(cfg.at("mesh"));
    qi::OpKind kind = qi::parse_op(qi::detail::field<std::string>(cfg, "operator", "bounds config"));
    qi::TestFunction f =
        qi::make_function(qi::detail::field<std::string>(cfg, "function", "bounds config"));
    int denom = cfg.contains("denom") ? qi::detail::field<int>(cfg, "denom", "bounds config") : 6;

    std::vector<std::string> theorems;
    if (cfg.contains("theorems")) {
        if (!cfg.at("theorems").is_array())
            throw qi::config_error("\"theorems\" must be an array of theorem ids");
        for (const auto& t : cfg.at("theorems")) theorems.push_back(t.get<std::string>());
        if (theorems.empty()) throw qi::config_error("\"theorems\" must not be empty");
    } else {
        for (const std::string& t : qi::all_theorems())
            if (qi::theorem_applicable(t, f)) theorems.push_back(t);
    }

    qi::BasisFamily F = qi::build_family(M);
    qi::Operator op = qi::make_operator(F, kind);
    json checks = json::array();
    bool pass = true;
    for (const std::string& t : theorems) {
        qi::ErrorReport R = qi::check_bound(t, op, f, denom);
        pass = pass && R.pass;
        checks.push_back(report_json(R));
    }
    json report{{"config", cfg}, {"mesh", mesh_summary(M)}, {"checks", checks}, {"pass", pass}};
    qi::atomic_write(out, report.dump(2) + "\n");
    std::cout << (pass ? "all " : "FAILURES among ") << checks.size() << " bound checks"
              << (pass ? " passed" : "") << "; report written to " << out << "\n";
    return pass ? 0 : 1;
}

int run_converge(const std::string& config_arg, const std::string& out) {
    json cfg = qi::json_from_arg(config_arg, "study config");
    qi::detail::reject_unknown(
        cfg, {"operator", "function", "type", "m0", "levels", "domain", "gamma", "seed"},
        "study config");
    qi::StudyConfig sc;
    sc.kind = qi::parse_op(qi::detail::field<std::string>(cfg, "operator", "study config"));
    sc.function = qi::detail::field<std::string>(cfg, "function", "study config");
    std::string type = qi::detail::field<std::string>(cfg, "type", "study config");
    if (type != "uniform" && type != "random")
        throw qi::config_error("\"type\" must be uniform or random, got '" + type + "'");
    sc.uniform = type == "uniform";
    sc.m0 = qi::detail::field<int>(cfg, "m0", "study config");
    sc.levels = qi::detail::field<int>(cfg, "levels", "study config");
    if (sc.uniform) {
        if (cfg.contains("gamma") || cfg.contains("seed"))
            throw qi::config_error("\"gamma\"/\"seed\" apply to random studies only");
        if (cfg.contains("domain")) {
            auto a = qi::detail::knot_array(cfg.at("domain"), "domain");
            if (a.size() != 4) throw qi::config_error("\"domain\" must be [x0,x1,y0,y1]");
            sc.domain = {a[0], a[1], a[2], a[3]};
        }
    } else {
        if (cfg.contains("domain"))
            throw qi::config_error("random studies are fixed to [0,1]^2; \"domain\" not allowed");
        sc.gamma = qi::detail::field<double>(cfg, "gamma", "study config");
        sc.seed = cfg.contains("seed")
                      ? qi::detail::field<std::uint64_t>(cfg, "seed", "study config")
                      : 0;
    }

    std::vector<qi::ConvergenceRow> rows = qi::convergence_study(sc);

    std::string csv = "# qi converge operator=" + std::string(qi::op_name(sc.kind)) +
                      " function=" + sc.function + " type=" + type +
                      " m0=" + std::to_string(sc.m0) + " levels=" + std::to_string(sc.levels);
    if (sc.uniform)
        csv += " domain=[" + qi::fmt17(sc.domain.x0) + "," + qi::fmt17(sc.domain.x1) + "," +
               qi::fmt17(sc.domain.y0) + "," + qi::fmt17(sc.domain.y1) + "]";
    else
        csv += " gamma=" + qi::fmt17(sc.gamma) + " seed=" + std::to_string(sc.seed);
    csv += "\n";
    csv +=
        "level,m,n,h,delta,gamma,err00,err10,err01,err20,err11,err02,ord00,ord10,ord01,ord20,"
        "ord11,ord02\n";
    for (const auto& r : rows) {
        csv += std::to_string(r.level) + "," + std::to_string(r.m) + "," + std::to_string(r.n) +
               "," + qi::fmt17(r.h) + "," + qi::fmt17(r.delta) + "," + qi::fmt17(r.gamma);
        for (double e : r.err) csv += "," + qi::fmt17(e);
        for (double o : r.ord) csv += std::isnan(o) ? "," : "," + qi::fmt17(o);
        csv += "\n";
    }
    qi::atomic_write(out, csv);
    std::cout << "study of " << rows.size() << " levels written to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadratic spline quasi-interpolants on criss-cross triangulations"};
    app.require_subcommand(1);

    std::string mesh_arg, op_s = "s2", fn, points, deriv = "0,0", out, config_arg;
    double tol = 1e-10;
    int samples = 50;
    bool as_json = false;
    int rc = 0;

    CLI::App* bc = app.add_subcommand("basis-check", "build the basis and report residuals");
    bc->add_option("--mesh", mesh_arg, "mesh spec (JSON file or inline)")->required();
    bc->add_option("--tol", tol, "residual tolerance");
    bc->callback([&] { rc = run_basis_check(mesh_arg, tol); });

    CLI::App* ev = app.add_subcommand("eval", "apply an operator and evaluate at points");
    ev->add_option("--mesh", mesh_arg)->required();
    ev->add_option("--operator", op_s, "s2 or w2star")->required();
    ev->add_option("--function", fn, "registry function")->required();
    ev->add_option("--points", points, "input points CSV")->required();
    ev->add_option("--deriv", deriv, "derivative multi-index a1,a2");
    ev->add_option("--out", out, "output CSV")->required();
    ev->callback([&] { rc = run_eval(mesh_arg, op_s, fn, points, deriv, out); });

    CLI::App* no = app.add_subcommand("norms", "sample the Lebesgue function");
    no->add_option("--mesh", mesh_arg)->required();
    no->add_option("--operator", op_s, "s2 or w2star")->required();
    no->add_option("--samples", samples, "lattice size per axis");
    no->add_flag("--json", as_json, "machine-readable output");
    no->callback([&] { rc = run_norms(mesh_arg, op_s, samples, as_json); });

    CLI::App* bo = app.add_subcommand("bounds", "check theorem error bounds");
    bo->add_option("--config", config_arg, "bounds config (JSON file or inline)")->required();
    bo->add_option("--out", out, "output report JSON")->required();
    bo->callback([&] { rc = run_bounds(config_arg, out); });

    CLI::App* co = app.add_subcommand("converge", "refinement study");
    co->add_option("--config", config_arg, "study config (JSON file or inline)")->required();
    co->add_option("--out", out, "output CSV")->required();
    co->callback([&] { rc = run_converge(config_arg, out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const qi::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qi::science_error& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
