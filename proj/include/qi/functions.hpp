#pragma once

#include "qi/common.hpp"

namespace qi {

namespace detail {

inline double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

struct PolyTerm {
    int a = 0, b = 0;
    double c = 0;
};

// General bivariate polynomial (arbitrary degree, unlike the quadratic Poly2).
struct PolyN {
    std::vector<PolyTerm> terms;

    double operator()(Pt P) const {
        double s = 0.0;
        for (const auto& t : terms) s += t.c * ipow(P.x, t.a) * ipow(P.y, t.b);
        return s;
    }
    PolyN dx() const {
        PolyN r;
        for (const auto& t : terms)
            if (t.a > 0) r.terms.push_back({t.a - 1, t.b, t.c * t.a});
        return r;
    }
    PolyN dy() const {
        PolyN r;
        for (const auto& t : terms)
            if (t.b > 0) r.terms.push_back({t.a, t.b - 1, t.c * t.b});
        return r;
    }
    PolyN d(int a1, int a2) const {
        PolyN r = *this;
        for (int k = 0; k < a1; ++k) r = r.dx();
        for (int k = 0; k < a2; ++k) r = r.dy();
        return r;
    }
    // sum |c| max|x|^a max|y|^b: an upper bound for sup |p| over the rectangle
    double sup_abs(const Rect& R) const {
        double mx = std::max(std::abs(R.x0), std::abs(R.x1));
        double my = std::max(std::abs(R.y0), std::abs(R.y1));
        double s = 0.0;
        for (const auto& t : terms) s += std::abs(t.c) * ipow(mx, t.a) * ipow(my, t.b);
        return s;
    }
};

// A * exp(u(x) + v(y)) with quadratic u, v given as (q0, q1, q2).
struct ExpTerm {
    double A = 0;
    std::array<double, 3> u{}, v{};

    static double q(const std::array<double, 3>& c, double z) {
        return c[0] + (c[1] + c[2] * z) * z;
    }
    static double dq(const std::array<double, 3>& c, double z) { return c[1] + 2.0 * c[2] * z; }

    double deriv(int a1, int a2, Pt P) const {
        const double val = A * std::exp(q(u, P.x) + q(v, P.y));
        const double ux = dq(u, P.x), vy = dq(v, P.y);
        double fac = 1.0;
        if (a1 == 1) fac *= ux;
        if (a1 == 2) fac *= 2.0 * u[2] + ux * ux;
        if (a2 == 1) fac *= vy;
        if (a2 == 2) fac *= 2.0 * v[2] + vy * vy;
        return fac * val;
    }
};

}  // namespace detail

// A registry function: exact derivatives up to total order dmax, plus optional
// analytic modulus-of-continuity upper bounds omega(D^s f, t) and an upper
// bound on max_{|alpha|=3} sup |D^alpha f| (both over a given rectangle).
struct TestFunction {
    std::string spec;
    int dmax = 0;
    std::array<std::array<std::function<double(Pt)>, 3>, 3> d{};
    int omega_smax = -1;
    std::function<double(int, double, const Rect&)> omega_fn;
    std::function<double(const Rect&)> d3_fn;

    double operator()(Pt P) const { return d[0][0](P); }

    const std::function<double(Pt)>& deriv(int a1, int a2) const {
        if (a1 < 0 || a2 < 0 || a1 + a2 > 2)
            throw config_error("derivative order " + std::to_string(a1) + "," +
                               std::to_string(a2) + " out of range (total order <= 2)");
        if (a1 + a2 > dmax)
            throw config_error("function '" + spec + "' provides no order-" +
                               std::to_string(a1 + a2) + " derivatives");
        return d[a1][a2];
    }
    bool has_omega(int s) const { return s <= omega_smax; }
    double omega_upper(int s, double t, const Rect& R) const {
        if (!has_omega(s))
            throw config_error("function '" + spec + "' has no modulus bound for D^" +
                               std::to_string(s));
        return omega_fn(s, t, R);
    }
    bool has_d3() const { return bool(d3_fn); }
    double d3_norm(const Rect& R) const {
        if (!has_d3())
            throw config_error("function '" + spec + "' has no third-derivative bound");
        return d3_fn(R);
    }
};

namespace detail {

inline double parse_num(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw config_error(std::string("cannot parse ") + what + " '" + s + "'");
    }
    if (used != s.size())
        throw config_error(std::string("trailing characters in ") + what + " '" + s + "'");
    return v;
}

inline int parse_exp(const std::string& s) {
    if (s.empty() || s.size() > 1 || s[0] < '0' || s[0] > '9')
        throw config_error("polynomial exponent '" + s + "' must be a single digit");
    return s[0] - '0';
}

inline TestFunction make_poly(const std::string& spec, const std::string& body) {
    PolyN p;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t end = body.find(';', pos);
        std::string term = body.substr(pos, end == std::string::npos ? end : end - pos);
        std::size_t comma = term.find(','), eq = term.find('=');
        if (comma == std::string::npos || eq == std::string::npos || eq < comma)
            throw config_error("polynomial term '" + term + "' is not of the form a,b=c");
        p.terms.push_back({parse_exp(term.substr(0, comma)),
                           parse_exp(term.substr(comma + 1, eq - comma - 1)),
                           parse_num(term.substr(eq + 1), "polynomial coefficient")});
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    if (p.terms.empty()) throw config_error("polynomial '" + spec + "' has no terms");

    TestFunction f;
    f.spec = spec;
    f.dmax = 2;
    for (int a1 = 0; a1 <= 2; ++a1)
        for (int a2 = 0; a1 + a2 <= 2; ++a2)
            f.d[a1][a2] = [q = p.d(a1, a2)](Pt P) { return q(P); };
    f.omega_smax = 2;
    f.omega_fn = [p](int s, double t, const Rect& R) {
        double lip = 0.0;
        for (int a1 = 0; a1 <= s; ++a1) {
            PolyN q = p.d(a1, s - a1);
            lip = std::max(lip, std::hypot(q.dx().sup_abs(R), q.dy().sup_abs(R)));
        }
        return lip * t;
    };
    f.d3_fn = [p](const Rect& R) {
        double m = 0.0;
        for (int a1 = 0; a1 <= 3; ++a1) m = std::max(m, p.d(a1, 3 - a1).sup_abs(R));
        return m;
    };
    return f;
}

}  // namespace detail

// Registry: poly:<a,b=c;...>, exp-sum = exp(x+y), sine = sin(pi x)sin(pi y),
// franke (standard), abs-ridge:<c> = |x-c|.
inline TestFunction make_function(const std::string& spec) {
    if (spec.rfind("poly:", 0) == 0) return detail::make_poly(spec, spec.substr(5));

    if (spec == "exp-sum") {
        TestFunction f;
        f.spec = spec;
        f.dmax = 2;
        auto e = [](Pt P) { return std::exp(P.x + P.y); };
        for (int a1 = 0; a1 <= 2; ++a1)
            for (int a2 = 0; a1 + a2 <= 2; ++a2) f.d[a1][a2] = e;
        f.omega_smax = 2;
        f.omega_fn = [](int, double t, const Rect& R) {
            return std::sqrt(2.0) * std::exp(R.x1 + R.y1) * t;
        };
        f.d3_fn = [](const Rect& R) { return std::exp(R.x1 + R.y1); };
        return f;
    }

    if (spec == "sine") {
        TestFunction f;
        f.spec = spec;
        f.dmax = 2;
        constexpr double pi = 3.14159265358979323846;
        auto trig = [](int k, double z) {
            return k == 0 ? std::sin(z) : (k == 1 ? std::cos(z) : -std::sin(z));
        };
        for (int a1 = 0; a1 <= 2; ++a1)
            for (int a2 = 0; a1 + a2 <= 2; ++a2)
                f.d[a1][a2] = [=](Pt P) {
                    return detail::ipow(pi, a1 + a2) * trig(a1, pi * P.x) * trig(a2, pi * P.y);
                };
        f.omega_smax = 2;
        f.omega_fn = [=](int s, double t, const Rect&) { return detail::ipow(pi, s + 1) * t; };
        f.d3_fn = [=](const Rect&) { return pi * pi * pi; };
        return f;
    }

    if (spec == "franke") {
        using detail::ExpTerm;
        static const std::array<ExpTerm, 4> terms = {{
            {0.75, {-1.0, 9.0, -81.0 / 4.0}, {-1.0, 9.0, -81.0 / 4.0}},
            {0.75, {-1.0 / 49.0, -18.0 / 49.0, -81.0 / 49.0}, {-0.1, -0.9, 0.0}},
            {0.5, {-49.0 / 4.0, 63.0 / 2.0, -81.0 / 4.0}, {-9.0 / 4.0, 27.0 / 2.0, -81.0 / 4.0}},
            {-0.2, {-16.0, 72.0, -81.0}, {-49.0, 126.0, -81.0}},
        }};
        TestFunction f;
        f.spec = spec;
        f.dmax = 2;
        for (int a1 = 0; a1 <= 2; ++a1)
            for (int a2 = 0; a1 + a2 <= 2; ++a2)
                f.d[a1][a2] = [a1, a2](Pt P) {
                    double s = 0.0;
                    for (const auto& t : terms) s += t.deriv(a1, a2, P);
                    return s;
                };
        return f;  // no modulus / third-derivative metadata
    }

    if (spec.rfind("abs-ridge:", 0) == 0) {
        double c = detail::parse_num(spec.substr(10), "ridge location");
        TestFunction f;
        f.spec = spec;
        f.dmax = 0;
        f.d[0][0] = [c](Pt P) { return std::abs(P.x - c); };
        f.omega_smax = 0;
        f.omega_fn = [](int, double t, const Rect&) { return t; };
        return f;
    }

    throw config_error("unknown function '" + spec +
                       "' (expected poly:<terms>, exp-sum, sine, franke, or abs-ridge:<c>)");
}

}  // namespace qi
