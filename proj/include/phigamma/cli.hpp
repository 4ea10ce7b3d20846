#ifndef PHIGAMMA_CLI_HPP
#define PHIGAMMA_CLI_HPP

#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phigamma/io.hpp"
#include "phigamma/suite.hpp"

// Batch front end.  run_cli parses argv-style arguments, dispatches to the
// library and returns the exit status: 0 success, 2 precondition failure
// (including parse errors), 3 property violation.  Machine-readable output is
// a versioned JSON report; it goes to --out (written atomically) or stdout.

namespace phigamma {

constexpr int kExitOk = 0;
constexpr int kExitPrecondition = 2;
constexpr int kExitViolation = 3;

struct Job {
    std::string command;
    u64 p = 3;
    bool p_given = false;
    std::string group = "GL3";
    std::optional<int> level;
    std::optional<int> prec;
    std::string window;
    std::string t;
    std::string t2;
    std::string rho;
    u64 seed = 1;
    std::string out;
    std::vector<std::string> inputs;
    // subcommand switches
    int depth = 1;
    bool closed_form = false;
    std::optional<i64> r;
    i64 n = 20;
    std::optional<int> log_r;
    int degree = 50;
};

// a named property the job checked; a false one turns the exit status to 3
struct Statement {
    std::string name;
    bool ok = true;
    std::string detail;
};

struct JobResult {
    json result = json::object();
    std::vector<Statement> statements;
    std::string text;
};

namespace cli_detail {

[[noreturn]] inline void precondition(const std::string& what) { fail("PreconditionFailed", what); }

inline RootDatum datum(const Job& j) {
    if (j.group == "GL2") return root_datum(2);
    if (j.group == "GL3") return root_datum(3);
    precondition("--group must be GL2 or GL3, got '" + j.group + "'");
}

// "s", "sbar", "s*sbar", "1" or comma-separated diagonal valuations
inline TorusElt parse_t(const RootDatum& D, u64 p, std::string s) {
    if (s.rfind("t:", 0) == 0) s = s.substr(2);
    if (s == "s") return s_elt(D, p);
    if (s == "sbar") return s_bar(D, p);
    if (s == "s*sbar" || s == "sbar*s") return torus_mul(s_elt(D, p), s_bar(D, p));
    if (s == "1" || s == "id") return torus_from_vals(p, std::vector<i64>(size_t(D.n), 0));
    std::vector<i64> vals;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        i64 v = 0;
        auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc() || end != part.data() + part.size()) precondition("malformed --t '" + s + "'");
        vals.push_back(v);
    }
    if (vals.size() != size_t(D.n))
        precondition("--t needs " + std::to_string(D.n) + " diagonal valuations for " + (D.n == 2 ? "GL2" : "GL3"));
    return torus_from_vals(p, vals);
}

inline TorusElt need_t(const Job& j, const RootDatum& D) {
    if (j.t.empty()) precondition("--t is required");
    return parse_t(D, j.p, j.t);
}

// "a/b" -> rho = p^(-a/b)
inline RhoExponent parse_rho(const std::string& s) {
    size_t slash = s.find('/');
    i64 a = 0, b = 1;
    try {
        size_t used = 0;
        a = std::stoll(s.substr(0, slash), &used);
        if (used != (slash == std::string::npos ? s.size() : slash)) throw std::invalid_argument(s);
        if (slash != std::string::npos) {
            b = std::stoll(s.substr(slash + 1), &used);
            if (used != s.size() - slash - 1) throw std::invalid_argument(s);
        }
    } catch (const std::exception&) {
        precondition("malformed --rho '" + s + "', expected a/b");
    }
    if (b <= 0) precondition("--rho denominator must be positive");
    return RhoExponent(Rat(a, b));
}

inline RhoExponent need_rho(const Job& j) {
    if (j.rho.empty()) precondition("--rho is required");
    return parse_rho(j.rho);
}

inline std::optional<std::pair<i64, i64>> parse_window(const std::string& s) {
    if (s.empty()) return std::nullopt;
    size_t c = s.find(':');
    if (c == std::string::npos) precondition("malformed --window '" + s + "', expected lo:hi");
    i64 lo = 0, hi = 0;
    try {
        lo = std::stoll(s.substr(0, c));
        hi = std::stoll(s.substr(c + 1));
    } catch (const std::exception&) {
        precondition("malformed --window '" + s + "'");
    }
    if (hi <= lo) precondition("--window needs lo < hi");
    return std::make_pair(lo, hi);
}

// --window lo:hi: inputs may not reach below lo and are truncated at hi
inline LaurentSeries apply_window(const Job& j, LaurentSeries f) {
    if (auto w = parse_window(j.window)) {
        if (!f.is_zero() && f.low() < w->first)
            precondition("series has a term T^" + std::to_string(f.low()) + " below the window");
        f = truncate(f, w->second);
    }
    if (j.prec) f = with_prec(f, *j.prec);
    return f;
}

inline SkewElt apply_window(const Job& j, SkewElt x) {
    for (auto& [h, f] : x.terms) f = apply_window(j, f);
    return x;
}

inline json load(const std::string& path, std::string& kind) {
    json d = read_json_file(path);
    kind = document_kind(d, path);
    return open_document(d, kind, path);
}

// an explicit --p must agree with the document it is applied to
inline void check_prime(const Job& j, u64 doc_p) {
    if (j.p_given && j.p != doc_p)
        precondition("--p " + std::to_string(j.p) + " disagrees with the document prime " + std::to_string(doc_p));
}

inline const std::string& one_input(const Job& j) {
    if (j.inputs.size() != 1) precondition(j.command + " takes exactly one --in file");
    return j.inputs[0];
}

inline std::string root_name(const RootDatum& D, int r) {
    if (D.n == 2) return "alpha";
    static const char* names[] = {"gamma", "beta", "alpha"};
    return names[r];
}

inline std::string norm_text(const NormValue& v, u64 p) { return norm_str(v, p); }

inline json torus_vals_json(const TorusElt& t) { return json(torus_vals(t)); }

inline json params_json(const Job& j) {
    json p = json::object();
    if (j.p_given || j.inputs.empty()) p["p"] = j.p;
    p["group"] = j.group;
    p["seed"] = j.seed;
    if (j.level) p["level"] = *j.level;
    if (j.prec) p["prec"] = *j.prec;
    if (!j.window.empty()) p["window"] = j.window;
    if (!j.t.empty()) p["t"] = j.t;
    if (!j.t2.empty()) p["t2"] = j.t2;
    if (!j.rho.empty()) p["rho"] = j.rho;
    if (!j.inputs.empty()) p["inputs"] = j.inputs;
    return p;
}

// ---------------------------------------------------------------- subcommands

inline JobResult run_decompose(const Job& j) {
    JobResult out;
    std::string kind;
    json body = load(one_input(j), kind);
    if (kind == "series") {
        auto f = apply_window(j, series_from_json(body, one_input(j)));
        check_prime(j, f.p);
        if (j.depth < 1) precondition("--depth must be >= 1");
        auto parts = etale_decompose(f, j.depth);
        json arr = json::array();
        for (auto& r : parts) arr.push_back(to_json(r));
        out.result = json{{"kind", "series"}, {"depth", j.depth}, {"parts", arr}};
        out.statements.push_back({"recombining the etale parts returns the input", ser_agree(etale_recombine(parts, j.depth), f), ""});
        out.text = "decomposed into " + std::to_string(parts.size()) + " parts\n";
    } else if (kind == "skew") {
        auto x = apply_window(j, skew_from_json(body, one_input(j)));
        check_prime(j, x.q.p);
        auto comps = skew_etale_decompose(x);
        json arr = json::array();
        for (auto& [w, y] : comps) arr.push_back(json{{"w", {{"i", w.i}, {"a", w.a}, {"b", w.b}}}, {"element", to_json(y)}});
        out.result = json{{"kind", "skew"}, {"components", arr}};
        out.statements.push_back({"recombining the etale components returns the input",
                                  skew_agree(skew_etale_recombine(comps, x.q, x.prec), x), ""});
        out.text = "decomposed into " + std::to_string(comps.size()) + " components\n";
    } else {
        precondition("decompose expects a series or skew document, got '" + kind + "'");
    }
    return out;
}

inline JobResult run_mul(const Job& j) {
    if (j.inputs.size() != 2) precondition("mul takes exactly two --in files");
    std::string ka, kb;
    json a = load(j.inputs[0], ka), b = load(j.inputs[1], kb);
    if (ka != kb) precondition("mul needs two documents of the same kind, got '" + ka + "' and '" + kb + "'");
    for (auto* d : {&a, &b})
        if (d->contains("p") && (*d)["p"].is_number_unsigned()) check_prime(j, (*d)["p"].get<u64>());
    JobResult out;
    if (ka == "series") {
        out.result = json{{"kind", "series"},
                          {"product", to_json(ser_mul(apply_window(j, series_from_json(a, j.inputs[0])),
                                                      apply_window(j, series_from_json(b, j.inputs[1]))))}};
    } else if (ka == "skew") {
        out.result = json{{"kind", "skew"},
                          {"product", to_json(skew_mul(apply_window(j, skew_from_json(a, j.inputs[0])),
                                                       apply_window(j, skew_from_json(b, j.inputs[1]))))}};
    } else if (ka == "dist") {
        out.result = json{{"kind", "dist"}, {"product", to_json(dist_mul(dist_from_json(a, j.inputs[0]), dist_from_json(b, j.inputs[1])))}};
    } else {
        precondition("mul expects series, skew or dist documents, got '" + ka + "'");
    }
    out.text = "product of two " + ka + " elements\n";
    return out;
}

inline JobResult run_solvex(const Job& j) {
    std::string kind;
    json body = load(one_input(j), kind);
    if (kind != "module") precondition("solvex expects a module document, got '" + kind + "'");
    auto M = module_from_json(body, one_input(j));
    check_prime(j, M.P[0][0].q.p);
    int K = j.level.value_or(M.level);
    if (K != M.level) precondition("--level " + std::to_string(K) + " differs from the module level " + std::to_string(M.level));
    SkewMat A = module_A(M), B = module_B(M);
    auto X = solve_X(A, B, K);
    auto Y = solve_Y(A, B, K);
    auto theta = theta_verify(M, X.sum);
    const QuotientSpec& q = A[0][0].q;
    SkewMat I = skewmat_identity(q, A[0][0].prec, M.d, A[0][0].cert);
    JobResult out;
    bool rx = skewmat_is_zero(x_residual(A, B, X.sum));
    bool ry = skewmat_is_zero(y_residual(A, B, Y.sum));
    bool inv = skewmat_agree(skewmat_mul(skewmat_add(I, X.sum), skewmat_add(I, Y.sum)), I);
    bool terms_ok = true;
    for (size_t k = 0; k < X.terms.size(); ++k) terms_ok = terms_ok && skewmat_in_ideal(X.terms[k], int(k) + 1);
    out.statements.push_back({"phi(id+X)(A+B) = A(id+X) modulo I_K", rx, ""});
    out.statements.push_back({"(A+B)(id+Y) = phi(id+Y)A modulo I_K", ry, ""});
    out.statements.push_back({"(id+X)(id+Y) = id", inv, ""});
    out.statements.push_back({"k-th term of X lies in I_(k+1)", terms_ok, ""});
    out.statements.push_back({"phi_t in the basis (id+X)e is iota of its augmentation", theta.ok, ""});
    json acts = json::object();
    for (auto& [name, ok] : theta.actions) acts[name] = ok;
    out.result = json{{"level", K}, {"X", to_json(X.sum)}, {"Y", to_json(Y.sum)}, {"x_residual_zero", rx}, {"y_residual_zero", ry},
                      {"theta", {{"ok", theta.ok}, {"x_equation", theta.x_equation}, {"actions", acts}}}};
    out.text = "solved X and Y at level " + std::to_string(K) + " (rank " + std::to_string(M.d) + ")\n";
    return out;
}

inline JobResult run_norm(const Job& j) {
    auto D = datum(j);
    auto rho = need_rho(j);
    JobResult out;
    std::ostringstream txt;
    if (j.closed_form) {
        auto t = need_t(j, D);
        json rows = json::array();
        txt << std::left << std::setw(8) << "root" << std::setw(6) << "m" << "norm\n";
        for (size_t r = 0; r < D.roots.size(); ++r) {
            auto v = phi_t_norm_closed(D, int(r), t, rho);
            i64 m = root_m(D, int(r), t);
            json row{{"root", root_name(D, int(r))}, {"m", m}};
            json nv = to_json(v);
            for (auto& [k, x] : nv.items()) row[k] = x;
            rows.push_back(row);
            txt << std::setw(8) << root_name(D, int(r)) << std::setw(6) << m << norm_text(v, j.p) << "\n";
        }
        out.result = json{{"table", "closed form ||phi_t(b_beta)||_rho"}, {"t", torus_vals_json(t)}, {"rows", rows}};
        out.text = txt.str();
        return out;
    }
    std::string kind;
    json body = load(one_input(j), kind);
    if (kind != "dist") precondition("norm expects a dist document, got '" + kind + "'");
    auto x = dist_from_json(body, one_input(j));
    check_prime(j, x.p);
    if (x.D.n != D.n) precondition("--group does not match the document");
    auto v = dist_norm(x, rho);
    out.result = json{{"spectral", to_json(v)}};
    txt << "||x||_rho = " << norm_text(v, x.p) << "\n";
    if (!j.t.empty()) {
        auto t = parse_t(D, x.p, j.t);
        auto rep = qt_sandwich(x, t, rho);
        out.result["qt"] = json{{"q", to_json(rep.q)},          {"rho_norm", to_json(rep.rho_norm)}, {"upper", to_json(rep.upper)},
                                {"maximal", rep.maximal},        {"components", rep.components}};
        out.statements.push_back({"||x||_rho <= q_t(x)", rep.left, ""});
        out.statements.push_back({"q_t(x) <= rho^-S ||x||_rho", rep.right, ""});
        txt << "q_t(x) = " << norm_text(rep.q, x.p) << ", upper bound " << norm_text(rep.upper, x.p) << "\n";
    }
    out.text = txt.str();
    return out;
}

inline JobResult run_region(const Job& j) {
    auto D = datum(j);
    auto rho = need_rho(j);
    JobResult out;
    if (j.r) {
        Region reg{rho, *j.r};
        auto t = t_of_region(D, j.p, reg);
        auto back = region_of_t(D, t, region_rho0(D, t, reg));
        out.result = json{{"region", to_json(reg)}, {"t", torus_vals_json(t)}, {"region_of_t", to_json(back)}};
        out.statements.push_back({"region_of_t(t_of_region(reg)) covers reg", region_covers(back, reg), ""});
        out.text = "t = diag valuations " + torus_vals_json(t).dump() + "\n";
    } else {
        auto t = need_t(j, D);
        auto reg = region_of_t(D, t, rho);
        out.result = json{{"t", torus_vals_json(t)}, {"region", to_json(reg)}};
        out.text = "region rho2 = p^(-" + reg.rho2.e.str() + "), r = " + std::to_string(reg.r) + "\n";
    }
    return out;
}

inline JobResult run_poset(const Job& j) {
    auto D = datum(j);
    auto t1 = need_t(j, D);
    JobResult out;
    out.result = json{{"t", torus_vals_json(t1)}, {"in_Tplus", in_Tplus(D, t1)}, {"s_bar", torus_vals_json(s_bar(D, j.p))}};
    std::ostringstream txt;
    txt << "t in T+: " << (in_Tplus(D, t1) ? "yes" : "no") << "\n";
    if (!j.t2.empty()) {
        auto t2 = parse_t(D, j.p, j.t2);
        bool a = leq_alpha(D, t1, t2), b = leq_alpha(D, t2, t1);
        auto ub = upper_bound(D, t1, t2);
        out.result["t2"] = torus_vals_json(t2);
        out.result["t_leq_t2"] = a;
        out.result["t2_leq_t"] = b;
        out.result["upper_bound"] = torus_vals_json(ub);
        out.statements.push_back({"upper bound dominates both arguments", leq_alpha(D, t1, ub) && leq_alpha(D, t2, ub), ""});
        txt << "t <=_alpha t2: " << (a ? "yes" : "no") << ", t2 <=_alpha t: " << (b ? "yes" : "no") << "\n";
        txt << "upper bound: " << torus_vals_json(ub).dump() << "\n";
    }
    out.text = txt.str();
    return out;
}

inline JobResult run_witness(const Job& j) {
    JobResult out;
    std::ostringstream txt;
    if (j.log_r) {
        auto rep = log_division_check(j.p, *j.log_r, j.degree, j.prec.value_or(8));
        json rows = json::array();
        txt << std::left << std::setw(6) << "i" << std::setw(8) << "val" << "c_i\n";
        for (size_t i = 0; i < rep.c.size(); ++i) {
            std::ostringstream c;
            c << rep.c[i];
            rows.push_back(json{{"i", i}, {"c", c.str()}, {"val", rep.val[i]}});
            txt << std::setw(6) << i << std::setw(8) << rep.val[i] << c.str() << "\n";
        }
        out.result = json{{"table", "log division"}, {"r", *j.log_r}, {"rows", rows}, {"bound_ok", rep.bound_ok},
                          {"first_violation", rep.first_violation}, {"identity_ok", rep.identity_ok}};
        out.statements.push_back({"val(c_i) >= -r - ceil(log_p(i+1))", rep.bound_ok, ""});
        out.statements.push_back({"phi^r(log) = p^r log through the window", rep.identity_ok, ""});
        out.text = txt.str();
        return out;
    }
    auto D = datum(j);
    auto t = need_t(j, D);
    auto rho = need_rho(j);
    auto tab = witness_series_ex(D, j.p, j.n, t, rho);
    json plain = json::array(), moved = json::array();
    txt << std::left << std::setw(6) << "n" << std::setw(16) << "plain" << "transported\n";
    for (auto& r : tab.rows) {
        plain.push_back(norm_row(r.n, r.plain));
        moved.push_back(norm_row(r.n, r.transported));
        txt << std::setw(6) << r.n << std::setw(16) << norm_text(r.plain, j.p) << norm_text(r.transported, j.p) << "\n";
    }
    out.result = json{{"table", "b_beta^n b_alpha^-n"}, {"plain", plain}, {"transported", moved},
                      {"plain_verdict", tab.plain_verdict}, {"transported_verdict", tab.transported_verdict}};
    txt << "plain: " << tab.plain_verdict << "; transported: " << tab.transported_verdict << "\n";
    out.text = txt.str();
    return out;
}

inline JobResult run_reduce(const Job& j) {
    if (!j.level) precondition("reduce needs --level");
    std::string kind;
    json body = load(one_input(j), kind);
    JobResult out;
    if (kind == "dist") {
        auto x = dist_from_json(body, one_input(j));
        check_prime(j, x.p);
        auto img = pi_H_map(x, *j.level);
        out.result = json{{"map", "pi_H"}, {"image", to_json(img)}};
        out.statements.push_back({"pi_H of a finitely supported element is overconvergent", skew_all_certified(img, CertClass::OEdagger), ""});
    } else if (kind == "skew") {
        auto x = skew_from_json(body, one_input(j));
        check_prime(j, x.q.p);
        out.result = json{{"map", "level reduction"}, {"image", to_json(reduce_level(x, *j.level))}};
    } else {
        precondition("reduce expects a dist or skew document, got '" + kind + "'");
    }
    out.text = "reduced to level " + std::to_string(*j.level) + "\n";
    return out;
}

// reduced-size property suite; every statement here is one the library claims
inline JobResult run_selftest(const Job& j) {
    std::mt19937_64 rng(j.seed);
    u64 p = j.p;
    using namespace suite;
    std::vector<Check> cs;
    cs.push_back(series_etale(rng, p, 20, 5, -6, 18));
    cs.push_back(skew_axioms(rng, p, 2, 10, 4));
    cs.push_back(phi_homomorphism(rng, p, 3, 10, 4));
    for (int k : {1, 2}) cs.push_back(phi_ideal_filtration(rng, p, k, 10, 4));
    {
        Check c{"phi(x) = 0 at level l forces x = 0 at level l-2", true, 0, 0, ""};
        for (int l : {3, 4}) {
            auto kp = phi_kernel_probe(rng, p, l, 10, 4);
            c.expect(kp.zero_at_l2 == kp.probes, "kernel element survives at level " + std::to_string(l - 2));
        }
        cs.push_back(c);
    }
    cs.push_back(solver(rng, p, 4, 3));
    cs.push_back(closed_form_grid(p));
    cs.push_back(sandwich(rng, p, 10, 4, p == 2 ? 16 : 10));
    cs.push_back(sandwich_tight_gl2());
    {
        Check c{"rho-norm is multiplicative on commuting generator pairs", true, 0, 0, ""};
        for (auto& r : generator_multiplicativity(p, RhoExponent(Rat(1, 4)), 10))
            if (r.pair != "b_alpha * b_beta" && r.pair != "b_beta * b_alpha") c.expect(r.ok, r.pair);
        cs.push_back(c);
    }
    {
        Check c{"monomials up to degree p^L - 1 are independent at level L", true, 0, 0, ""};
        c.expect(rank_check(root_datum(3), p, 2, int(ipow(p, 2)) - 1, 3), "rank check failed");
        c.expect(!rank_check(root_datum(3), p, 1, int(p), 2), "degree p at level 1 should be dependent");
        cs.push_back(c);
    }
    cs.push_back(region_round_trip(rng, p, {2, 3, 5}, RhoExponent(Rat(1, 2)), 10));
    cs.push_back(witness_table(p, 8));
    for (int r : {1, 2}) cs.push_back(log_division(p, r, 30));
    cs.push_back(gl2_degeneration(rng, 5));
    cs.push_back(iota_independence(rng, p, 10, 4));
    cs.push_back(pi_H(rng, p, 3, 10, 4));
    JobResult out;
    json rows = json::array();
    std::ostringstream txt;
    for (auto& c : cs) {
        rows.push_back(json{{"statement", c.name}, {"ok", c.ok}, {"cases", c.cases}, {"detail", c.detail}});
        out.statements.push_back({c.name, c.ok, c.detail});
        txt << (c.ok ? "ok    " : "FAIL  ") << c.name << " (" << c.cases << " cases)" << (c.ok ? "" : ": " + c.detail) << "\n";
    }
    out.result = json{{"suite", rows}};
    out.text = txt.str();
    return out;
}

inline JobResult dispatch(const Job& j) {
    if (!detail::is_prime(j.p)) precondition("--p must be a prime, got " + std::to_string(j.p));
    datum(j);
    if (j.command == "decompose") return run_decompose(j);
    if (j.command == "mul") return run_mul(j);
    if (j.command == "solvex") return run_solvex(j);
    if (j.command == "norm") return run_norm(j);
    if (j.command == "region") return run_region(j);
    if (j.command == "poset") return run_poset(j);
    if (j.command == "witness") return run_witness(j);
    if (j.command == "reduce") return run_reduce(j);
    if (j.command == "selftest") return run_selftest(j);
    precondition("unknown subcommand '" + j.command + "'");
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Job job;
    CLI::App app{"phigamma: exact kernels for (phi, Gamma)-ring constructions", "phigamma"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--p", job.p, "prime")->capture_default_str();
    app.add_option("--group", job.group, "GL2 or GL3")->capture_default_str();
    app.add_option("--level", job.level, "level k of H_1/H_k or target level");
    app.add_option("--prec", job.prec, "coefficient precision in p-digits");
    app.add_option("--window", job.window, "series window lo:hi");
    app.add_option("--t", job.t, "torus element: s, sbar, s*sbar or diagonal valuations v0,v1[,v2]");
    app.add_option("--rho", job.rho, "rho = p^(-a/b) given as a/b");
    app.add_option("--seed", job.seed, "random seed")->capture_default_str();
    app.add_option("--out", job.out, "write the JSON report here");

    auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->callback([&job, name] { job.command = name; });
        return sub;
    };
    auto* dec = add("decompose", "etale decomposition of a series or skew element");
    dec->add_option("--in", job.inputs, "input document")->required();
    dec->add_option("--depth", job.depth, "depth c for series")->capture_default_str();
    add("mul", "product of two series, skew or dist elements")->add_option("--in", job.inputs, "two input documents")->required();
    add("solvex", "X/Y solver and theta report for a module")->add_option("--in", job.inputs, "module document")->required();
    auto* nrm = add("norm", "closed-form, spectral or q_t norms");
    nrm->add_flag("--closed-form", job.closed_form, "table of ||phi_t(b_beta)||_rho over the positive roots");
    nrm->add_option("--in", job.inputs, "dist document");
    auto* reg = add("region", "region_of_t, or t_of_region with --r");
    reg->add_option("--r", job.r, "region exponent r");
    auto* pos = add("poset", "T+ membership, <=_alpha and upper bounds");
    pos->add_option("--t2", job.t2, "second torus element");
    auto* wit = add("witness", "term-norm table, or log division with --log");
    wit->add_option("--n", job.n, "number of terms")->capture_default_str();
    wit->add_option("--log", job.log_r, "log division for phi^r");
    wit->add_option("--degree", job.degree, "log division degree window")->capture_default_str();
    add("reduce", "pi_H of a dist element or level reduction of a skew element")->add_option("--in", job.inputs, "input document")->required();
    add("selftest", "property suite at a fixed seed");

    std::vector<const char*> argv{"phigamma"};
    for (auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
        return kExitPrecondition;
    }

    job.p_given = app.get_option("--p")->count() > 0;
    JobResult res;
    try {
        res = cli_detail::dispatch(job);
    } catch (const Error& e) {
        err << json{{"error", e.code}, {"message", e.what()}, {"command", job.command}}.dump() << "\n";
        return kExitPrecondition;
    }
    json report = make_document("report", json{{"command", job.command}, {"params", cli_detail::params_json(job)}});
    json st = json::array();
    std::vector<std::string> violated;
    for (auto& s : res.statements) {
        st.push_back(json{{"statement", s.name}, {"ok", s.ok}});
        if (!s.ok) violated.push_back(s.name);
    }
    report["statements"] = st;
    report["result"] = res.result;
    std::string text = report.dump(2) + "\n";
    if (!job.out.empty()) {
        try {
            write_file_atomic(job.out, text);
        } catch (const Error& e) {
            err << json{{"error", e.code}, {"message", e.what()}}.dump() << "\n";
            return kExitPrecondition;
        }
        out << res.text;
    } else {
        out << text;
    }
    if (!violated.empty()) {
        err << json{{"error", "PropertyViolation"}, {"violated", violated}}.dump() << "\n";
        return kExitViolation;
    }
    return kExitOk;
}

}  // namespace phigamma

#endif
